use super::{pi, PrecisionCtx, Real};
use crate::error::{Error, Result};
use rug::Float;

/// Maximum number of step halvings.
pub const LEVEL_CAP: u32 = 12;

#[derive(Clone, Debug)]
pub struct QuadEstimate {
    pub value: Real,
    /// Change between the last two levels.
    pub error_estimate: Real,
    pub levels: u32,
}

/// `int_0^inf f(x) dx` by the exp-sinh rule `x = exp(pi/2 sinh u)`.
///
/// The trapezoid step in `u` is halved until two successive levels differ by
/// less than `tol` (absolute). Each level only evaluates the new midpoints.
pub fn quad_semiinf<F>(f: F, tol: &Real, ctx: &PrecisionCtx) -> Result<QuadEstimate>
where
    F: Fn(&Real) -> Real,
{
    if *tol <= 0 {
        return Err(Error::Domain("quadrature tolerance must be positive".into()));
    }
    let prec = ctx.work_bits();
    let half_pi = pi(prec) / 2u32;
    let mut h = Float::with_val(prec, 0.5);

    let node = |u: &Float| -> Float {
        let arg = Float::with_val(prec, u.sinh_ref()) * &half_pi;
        let x = Float::with_val(prec, arg.exp_ref());
        if x.is_zero() || x.is_infinite() {
            return Float::new(prec);
        }
        let jac = Float::with_val(prec, u.cosh_ref()) * &half_pi * &x;
        let fx = f(&x);
        if fx.is_nan() {
            return Float::new(prec);
        }
        Float::with_val(prec, &fx * &jac)
    };

    // Sum over nodes +-k*h for k = start, start + stride, ..., walking outwards
    // until terms are negligible against `scale`.
    let sweep = |h: &Float, start: u64, stride: u64, scale: &Float| -> Float {
        let mut acc = Float::new(prec);
        for sign in [1i32, -1] {
            let mut k = start;
            let mut prev: Option<Float> = None;
            loop {
                let u = Float::with_val(prec, h * k) * sign;
                let term = node(&u);
                let mag = Float::with_val(prec, term.abs_ref());
                acc += &term;
                let far = u.to_f64().abs() > 1.0;
                let reference = Float::with_val(prec, acc.abs_ref()).max(scale);
                let small = mag.is_zero()
                    || match (mag.get_exp(), reference.get_exp()) {
                        (Some(a), Some(b)) => a < b - prec as i32 - 4,
                        _ => false,
                    };
                let decreasing = prev.as_ref().is_some_and(|p| mag <= *p);
                if far && small && (decreasing || mag.is_zero()) {
                    break;
                }
                // Past |u| = 8 the abscissae leave any representable range.
                if u.to_f64().abs() > 8.0 {
                    break;
                }
                prev = Some(mag);
                k += stride;
            }
        }
        acc
    };

    let zero = Float::new(prec);
    let centre = node(&zero);
    let mut sum = sweep(&h, 1, 1, &Float::with_val(prec, centre.abs_ref())) + &centre;
    let mut estimate = Float::with_val(prec, &sum * &h);
    for level in 1..=LEVEL_CAP {
        h /= 2u32;
        let scale = Float::with_val(prec, sum.abs_ref());
        sum += sweep(&h, 1, 2, &scale);
        let next = Float::with_val(prec, &sum * &h);
        let change = Float::with_val(prec, &next - &estimate).abs();
        estimate = next;
        if level >= 2 && change < *tol {
            return Ok(QuadEstimate { value: estimate, error_estimate: change, levels: level });
        }
        if level == LEVEL_CAP {
            return Err(Error::NonConvergence {
                levels: level,
                last_change: change.to_string_radix(10, Some(6)),
            });
        }
    }
    unreachable!("loop returns at the level cap")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{bessel_k, rel_diff};

    fn ctx() -> PrecisionCtx {
        PrecisionCtx::with_bits(256).unwrap()
    }

    fn tol(c: &PrecisionCtx, v: f64) -> Real {
        c.real(v)
    }

    #[test]
    fn exponential_integrals() {
        let c = ctx();
        let prec = c.work_bits();
        let one = quad_semiinf(|x| Float::with_val(prec, -x).exp(), &tol(&c, 1e-60), &c).unwrap();
        assert!(Float::with_val(prec, &one.value - 1u32).abs() < 1e-60);
        let mean = quad_semiinf(|x| Float::with_val(prec, -x).exp() * x, &tol(&c, 1e-60), &c).unwrap();
        assert!(Float::with_val(prec, &mean.value - 1u32).abs() < 1e-60);
    }

    #[test]
    fn matches_bessel_identity() {
        // int x e^{-x-1/x} dx = 2 K_2(2)
        let c = ctx();
        let prec = c.work_bits();
        let f = |x: &Real| {
            let expo = Float::with_val(prec, x + Float::with_val(prec, x.recip_ref()));
            Float::with_val(prec, (-expo).exp_ref()) * x
        };
        let q = quad_semiinf(f, &tol(&c, 1e-60), &c).unwrap();
        let k = bessel_k(&c.real(2), &c.real(2), &c).unwrap() * 2u32;
        assert!(rel_diff(&q.value, &k) < 1e-58);
    }

    #[test]
    fn bessel_integral_representation() {
        // K_3(2) = int_0^inf e^{-2 cosh u} cosh(3u) du; with x = e^u over the
        // whole line this is 1/2 int_0^inf e^{-(x + 1/x)} (x^3 + x^-3) / (2x) dx.
        let c = ctx();
        let prec = c.work_bits();
        let f = |x: &Real| {
            let inv = Float::with_val(prec, x.recip_ref());
            let expo = Float::with_val(prec, x + &inv);
            let cube = Float::with_val(prec, x.square_ref()) * x;
            let inv_cube = Float::with_val(prec, inv.square_ref()) * &inv;
            Float::with_val(prec, (-expo).exp_ref()) * (cube + inv_cube) / 4u32 * inv
        };
        let q = quad_semiinf(f, &tol(&c, 1e-40), &c).unwrap();
        let k = bessel_k(&c.real(3), &c.real(2), &c).unwrap();
        assert!(rel_diff(&q.value, &k) < 1e-30);
    }

    #[test]
    fn algebraic_endpoint_at_zero() {
        // int x^{-1/2} e^{-x} dx = sqrt(pi)
        let c = ctx();
        let prec = c.work_bits();
        let f = |x: &Real| Float::with_val(prec, -x).exp() / Float::with_val(prec, x.sqrt_ref());
        let q = quad_semiinf(f, &tol(&c, 1e-50), &c).unwrap();
        assert!(rel_diff(&q.value, &pi(prec).sqrt()) < 1e-48);
    }

    #[test]
    fn reports_non_convergence() {
        let c = PrecisionCtx::with_bits(64).unwrap();
        let prec = c.work_bits();
        // Oscillatory integrand: the exp-sinh rule cannot settle at this tolerance.
        let f = |x: &Real| Float::with_val(prec, x.sin_ref()) * (Float::with_val(prec, -x) / 1000u32).exp();
        assert!(matches!(
            quad_semiinf(f, &tol(&c, 1e-30), &c),
            Err(Error::NonConvergence { .. })
        ));
    }
}
