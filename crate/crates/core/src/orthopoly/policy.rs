use crate::error::{Error, Result};
use crate::numkernel::{PrecisionCtx, Real};
use rug::Float;

/// Automatic precision for Hankel problems of size `n`.
pub fn policy_bits(n: usize) -> u32 {
    128 + 12 * n as u32
}

/// How many times the precision may double before giving up.
pub const MAX_DOUBLINGS: u32 = 4;

/// A value accepted by the two-precision rule, with the precision it used.
#[derive(Clone, Debug)]
pub struct Certified<T> {
    pub value: T,
    pub bits: u32,
}

/// Run `f` at `bits` and `2 bits`; accept when every fingerprint entry
/// agrees to `2^{-bits/2}` (relative, floored at magnitude 1). Pivot loss or
/// disagreement doubles `bits`. `requested_bits = 0` selects the policy.
pub fn with_policy<T, F, P>(requested_bits: u32, n: usize, guard_bits: u32, f: F, fingerprint: P) -> Result<Certified<T>>
where
    F: Fn(&PrecisionCtx) -> Result<T>,
    P: Fn(&T) -> Vec<&Real>,
{
    let mut bits = if requested_bits == 0 { policy_bits(n) } else { requested_bits };
    for _ in 0..=MAX_DOUBLINGS {
        let ctx = PrecisionCtx::new(bits, guard_bits)?;
        let coarse = match f(&ctx) {
            Ok(v) => v,
            Err(Error::PivotLoss { .. }) => {
                bits *= 2;
                continue;
            }
            Err(e) => return Err(e),
        };
        let fine = match f(&ctx.doubled()) {
            Ok(v) => v,
            Err(Error::PivotLoss { .. }) => {
                bits *= 2;
                continue;
            }
            Err(e) => return Err(e),
        };
        if agree(&fingerprint(&coarse), &fingerprint(&fine), bits) {
            return Ok(Certified { value: coarse, bits });
        }
        bits *= 2;
    }
    Err(Error::PrecisionExhausted { bits })
}

fn agree(a: &[&Real], b: &[&Real], bits: u32) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            let prec = x.prec().max(y.prec());
            let diff = Float::with_val(prec, *x - *y).abs();
            let scale = Float::with_val(prec, x.abs_ref()).max(&Float::with_val(prec, 1));
            diff <= (scale >> (bits / 2))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_formula() {
        assert_eq!(policy_bits(0), 128);
        assert_eq!(policy_bits(10), 248);
    }

    #[test]
    fn exhaustion_is_reported() {
        let out = with_policy(
            64,
            1,
            0,
            |_| -> Result<Real> { Err(Error::PivotLoss { row: 0, bits: 64 }) },
            |v| vec![v],
        );
        assert!(matches!(out, Err(Error::PrecisionExhausted { .. })));
    }

    #[test]
    fn disagreement_raises_precision() {
        // A value that only settles once bits >= 256.
        let out = with_policy(
            64,
            1,
            0,
            |ctx| Ok(Real::with_val(ctx.work_bits(), if ctx.bits() >= 256 { 1.0 } else { ctx.bits() as f64 })),
            |v| vec![v],
        )
        .unwrap();
        assert_eq!(out.bits, 256);
    }
}
