//! Precision contract, exact decimal inputs, special functions and the
//! quadrature oracle.

mod bessel;
mod decimal;
mod quad;

pub use bessel::{bessel_k, bessel_k_ladder};
pub use decimal::Decimal;
pub use quad::{quad_semiinf, QuadEstimate, LEVEL_CAP};

use crate::error::{Error, Result};
use rug::float::Constant;
use rug::Float;
use serde::{Deserialize, Serialize};

/// Arbitrary-precision real number. Precision travels with each value.
pub type Real = Float;

/// Working precision for a computation: `bits` is the target accuracy and
/// `guard_bits` the extra mantissa spent on intermediate steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecisionCtx {
    bits: u32,
    guard_bits: u32,
}

impl PrecisionCtx {
    pub const MIN_BITS: u32 = 64;
    pub const DEFAULT_GUARD: u32 = 32;

    pub fn new(bits: u32, guard_bits: u32) -> Result<Self> {
        if bits < Self::MIN_BITS {
            return Err(Error::Domain(format!(
                "precision must be at least {} bits, got {bits}",
                Self::MIN_BITS
            )));
        }
        Ok(Self { bits, guard_bits })
    }

    /// Context with the default guard.
    pub fn with_bits(bits: u32) -> Result<Self> {
        Self::new(bits, Self::DEFAULT_GUARD)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn guard_bits(&self) -> u32 {
        self.guard_bits
    }

    /// Mantissa length used for arithmetic.
    pub fn work_bits(&self) -> u32 {
        self.bits + self.guard_bits
    }

    pub fn doubled(&self) -> Self {
        Self { bits: self.bits * 2, guard_bits: self.guard_bits }
    }

    /// Same guard, extra target bits.
    pub fn widened(&self, extra: u32) -> Self {
        Self { bits: self.bits + extra, guard_bits: self.guard_bits }
    }

    /// `2^-bits` at working precision.
    pub fn epsilon(&self) -> Real {
        Real::with_val(self.work_bits(), 1) >> self.bits
    }

    pub fn real<T>(&self, value: T) -> Real
    where
        Real: rug::Assign<T>,
    {
        Real::with_val(self.work_bits(), value)
    }
}

/// Full-precision decimal rendering. Parsing the text back at the value's
/// own precision reproduces the value exactly.
pub fn to_decimal(x: &Real) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let text = x.to_string_radix(10, None);
    let (mantissa, exponent) = match text.split_once('e') {
        Some((m, e)) => (m, e),
        None => (text.as_str(), "0"),
    };
    let mantissa = if mantissa.contains('.') { mantissa.trim_end_matches('0').trim_end_matches('.') } else { mantissa };
    match exponent.parse::<i64>() {
        Ok(0) => mantissa.to_string(),
        _ => format!("{mantissa}e{exponent}"),
    }
}

/// Parse a decimal string into a real with `prec` bits.
pub fn parse_real(text: &str, prec: u32) -> Result<Real> {
    let parsed = Float::parse(text.trim()).map_err(|_| Error::Parse(text.to_string()))?;
    Ok(Float::with_val(prec, parsed))
}

/// Lossy conversion for reporting and log-log fits.
pub fn to_f64(x: &Real) -> f64 {
    x.to_f64()
}

pub fn pi(prec: u32) -> Real {
    Float::with_val(prec, Constant::Pi)
}

pub fn euler_gamma(prec: u32) -> Real {
    Float::with_val(prec, Constant::Euler)
}

/// Gamma function for positive arguments.
pub fn gamma(x: &Real, ctx: &PrecisionCtx) -> Result<Real> {
    if !x.is_finite() || *x <= 0 {
        return Err(Error::Domain(format!("gamma needs x > 0, got {}", x.to_f64())));
    }
    Ok(Float::with_val(ctx.work_bits(), x.gamma_ref()))
}

/// `ln Gamma(x)` for positive arguments.
pub fn ln_gamma(x: &Real, ctx: &PrecisionCtx) -> Result<Real> {
    if !x.is_finite() || *x <= 0 {
        return Err(Error::Domain(format!("ln_gamma needs x > 0, got {}", x.to_f64())));
    }
    Ok(Float::with_val(ctx.work_bits(), x.ln_gamma_ref()))
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff(a: &Real, b: &Real) -> Real {
    let prec = a.prec().max(b.prec());
    let scale = Float::with_val(prec, a.abs_ref()).max(&Float::with_val(prec, b.abs_ref()));
    if scale.is_zero() {
        return Float::new(prec);
    }
    Float::with_val(prec, a - b).abs() / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_known_values() {
        let ctx = PrecisionCtx::with_bits(256).unwrap();
        assert_eq!(gamma(&ctx.real(1), &ctx).unwrap(), 1);
        assert_eq!(gamma(&ctx.real(5), &ctx).unwrap(), 24);
        let half = gamma(&ctx.real(0.5), &ctx).unwrap();
        let root_pi = pi(ctx.work_bits()).sqrt();
        assert!(rel_diff(&half, &root_pi) < ctx.epsilon());
    }

    #[test]
    fn gamma_rejects_nonpositive() {
        let ctx = PrecisionCtx::with_bits(64).unwrap();
        assert!(matches!(gamma(&ctx.real(0), &ctx), Err(Error::Domain(_))));
        assert!(matches!(gamma(&ctx.real(-2.5), &ctx), Err(Error::Domain(_))));
    }

    #[test]
    fn precision_floor() {
        assert!(PrecisionCtx::with_bits(63).is_err());
        assert_eq!(PrecisionCtx::new(100, 10).unwrap().work_bits(), 110);
    }

    #[test]
    fn decimal_round_trip_is_exact() {
        for prec in [64u32, 113, 300, 1024] {
            let x = Real::with_val(prec, 7) / 3u32;
            let back = parse_real(&to_decimal(&x), prec).unwrap();
            assert_eq!(x, back);
        }
    }
}
