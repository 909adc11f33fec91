use super::data::{logdet_data, ortho_data};
use super::hankel::build_system;
use super::FiniteCell;
use crate::error::{Error, Result};
use crate::numkernel::{Decimal, PrecisionCtx, Real};
use crate::weightmoments::WeightParams;
use rug::ops::Pow;
use rug::Float;

/// Residual of the second-order equation satisfied by `H_n`:
/// `(t H'')^2 = (n - (2n+a) H')^2 - 4 (n(n+a) + t H' - H) H' (H' - 1)`.
#[derive(Clone, Debug)]
pub struct SigmaCheck {
    pub lhs: Real,
    pub rhs: Real,
    pub largest_term: Real,
    /// `|lhs - rhs| / largest_term`.
    pub relative: Real,
}

pub fn sigma_form_residual(n: usize, params: &WeightParams, ctx: &PrecisionCtx) -> Result<SigmaCheck> {
    if params.is_classical() {
        return Err(Error::Domain("sigma-form residual needs t > 0".into()));
    }
    let sys = build_system(n, params, ctx)?;
    let ld = logdet_data(&sys, n)?;
    let prec = sys.prec();
    let t = params.t().to_real(prec);
    let alpha = params.alpha().to_real(prec);
    let hp = ld.h_prime.expect("t > 0");
    let hpp = ld.h_double_prime.expect("t > 0");
    let nn = Float::with_val(prec, n as u32);

    let lhs = Float::with_val(prec, &t * &hpp).square();
    let two_n_a = Float::with_val(prec, &nn * 2u32) + &alpha;
    let first = (Float::with_val(prec, &nn - Float::with_val(prec, &two_n_a * &hp))).square();
    let n_n_a = Float::with_val(prec, &nn + &alpha) * &nn;
    let beta_like = n_n_a + Float::with_val(prec, &t * &hp) - &ld.h;
    let second = beta_like * &hp * Float::with_val(prec, &hp - 1u32) * 4u32;
    let rhs = Float::with_val(prec, &first - &second);

    let largest = [&lhs, &first, &second]
        .iter()
        .map(|v| Float::with_val(prec, v.abs_ref()))
        .fold(Float::new(prec), |m, v| m.max(&v));
    let relative = Float::with_val(prec, &lhs - &rhs).abs() / &largest;
    Ok(SigmaCheck { lhs, rhs, largest_term: largest, relative })
}

/// `a_n` alone (a system of size `n + 2` without the trace algebra).
pub fn a_n_value(n: usize, params: &WeightParams, ctx: &PrecisionCtx) -> Result<Real> {
    let sys = build_system(n + 2, params, ctx)?;
    Ok(ortho_data(&sys).a.swap_remove(n))
}

/// Central differences of `a_n(t)` substituted into its Painleve III form.
#[derive(Clone, Debug)]
pub struct OdeCheck {
    pub a: Real,
    pub a_prime: Real,
    pub a_second: Real,
    pub residual: Real,
}

/// Residual of
/// `a'' = a'^2/a - a'/t + (2n+1+alpha) a^2/t^2 + a^3/t^2 + alpha/t - 1/a`
/// with derivatives from central differences over `h_step`.
pub fn an_ode_residual(
    n: usize,
    params: &WeightParams,
    ctx: &PrecisionCtx,
    h_step: &Decimal,
) -> Result<OdeCheck> {
    let t = params.t();
    if !h_step.is_positive() || t <= h_step {
        return Err(Error::Domain("need 0 < h < t for central differences".into()));
    }
    let a = a_n_value(n, params, ctx)?;
    let prec = a.prec();
    let threshold = Float::with_val(prec, 10u32).pow(-(ctx.bits() as i32) / 4);
    if Float::with_val(prec, a.abs_ref()) < threshold {
        return Err(Error::Indeterminate { value: a.to_string_radix(10, Some(8)) });
    }
    let plus = a_n_value(n, &params.with_t(t.add(h_step))?, ctx)?;
    let minus = a_n_value(n, &params.with_t(t.sub(h_step))?, ctx)?;
    let h = h_step.to_real(prec);
    let tr = t.to_real(prec);
    let alpha = params.alpha().to_real(prec);

    let a_prime = Float::with_val(prec, &plus - &minus) / Float::with_val(prec, &h * 2u32);
    let a_second =
        (Float::with_val(prec, &plus + &minus) - Float::with_val(prec, &a * 2u32)) / Float::with_val(prec, h.square_ref());
    let t2 = Float::with_val(prec, tr.square_ref());
    let a2 = Float::with_val(prec, a.square_ref());
    let coeff = Float::with_val(prec, &alpha + (2 * n + 1) as u32);
    let rhs = Float::with_val(prec, a_prime.square_ref()) / &a - Float::with_val(prec, &a_prime / &tr)
        + coeff * &a2 / &t2
        + Float::with_val(prec, &a2 * &a) / &t2
        + Float::with_val(prec, &alpha / &tr)
        - Float::with_val(prec, a.recip_ref());
    let residual = Float::with_val(prec, &a_second - &rhs);
    Ok(OdeCheck { a, a_prime, a_second, residual })
}

/// Two sides of an identity and their relative disagreement.
#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub lhs: Real,
    pub rhs: Real,
    /// `|lhs - rhs| / max(|lhs|, |rhs|)`.
    pub relative: Real,
    pub absolute: Real,
}

impl IdentityCheck {
    fn new(lhs: Real, rhs: Real) -> Self {
        let absolute = Float::with_val(lhs.prec(), &lhs - &rhs).abs();
        let relative = crate::numkernel::rel_diff(&lhs, &rhs);
        Self { lhs, rhs, relative, absolute }
    }
}

/// `beta_n` against `n(n+alpha) + t H_n' - H_n`.
pub fn beta_identity(n: usize, params: &WeightParams, ctx: &PrecisionCtx) -> Result<IdentityCheck> {
    let cell = FiniteCell::compute(n, params, ctx)?;
    let prec = cell.beta_n.prec();
    let t = params.t().to_real(prec);
    let alpha = params.alpha().to_real(prec);
    let nn = Float::with_val(prec, n as u32);
    let hp = cell.h_prime.clone().ok_or_else(|| Error::Domain("H_n' unavailable".into()))?;
    let rhs = Float::with_val(prec, &nn + &alpha) * &nn + Float::with_val(prec, &t * &hp) - &cell.h;
    Ok(IdentityCheck::new(cell.beta_n, rhs))
}

/// `2t d/dt ln gamma_n` by central differences of `-(ln D_{n+1} - ln D_n)/2`,
/// against `a_n`.
pub fn gamma_log_derivative(
    n: usize,
    params: &WeightParams,
    ctx: &PrecisionCtx,
    h_step: &Decimal,
) -> Result<IdentityCheck> {
    let t = params.t();
    if !h_step.is_positive() || t <= h_step {
        return Err(Error::Domain("need 0 < h < t for central differences".into()));
    }
    let ln_gamma = |p: &WeightParams| -> Result<Real> {
        let data = ortho_data(&build_system(n + 2, p, ctx)?);
        let prec = data.h[n].prec();
        Ok(Float::with_val(prec, data.gamma[n].ln_ref()))
    };
    let up = ln_gamma(&params.with_t(t.add(h_step))?)?;
    let down = ln_gamma(&params.with_t(t.sub(h_step))?)?;
    let a = a_n_value(n, params, ctx)?;
    let prec = a.prec();
    let lhs = Float::with_val(prec, &up - &down) * t.to_real(prec) / h_step.to_real(prec);
    Ok(IdentityCheck::new(lhs, a))
}
