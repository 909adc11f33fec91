use super::{euler_gamma, pi, PrecisionCtx, Real};
use crate::error::{Error, Result};
use rug::Float;

/// Modified Bessel function of the second kind `K_nu(x)` for `nu >= 0`.
pub fn bessel_k(nu: &Real, x: &Real, ctx: &PrecisionCtx) -> Result<Real> {
    Ok(bessel_k_ladder(nu, 1, x, ctx)?.pop().expect("ladder of length 1"))
}

/// `K_{nu0 + i}(x)` for `i = 0..count`.
///
/// Two base orders `mu, mu + 1` with `|mu| <= 1/2` come from Temme's series,
/// the rest from forward recurrence, which is stable because `K` grows with
/// the order.
pub fn bessel_k_ladder(nu0: &Real, count: usize, x: &Real, ctx: &PrecisionCtx) -> Result<Vec<Real>> {
    if !x.is_finite() || *x <= 0 {
        return Err(Error::Domain(format!("bessel_k needs x > 0, got {}", x.to_f64())));
    }
    if !nu0.is_finite() || *nu0 < 0 {
        return Err(Error::Domain(format!("bessel_k needs nu >= 0, got {}", nu0.to_f64())));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let out_prec = ctx.work_bits();
    let base = Float::with_val(out_prec, nu0.round_ref());
    let shift = base.to_f64() as usize;
    let top = shift + count;
    // Recurrence from the bottom of the ladder adds a few bits of rounding per
    // step; Temme's series cancels about 2x/ln 2 bits.
    let prec = out_prec + 32 + (top as f64).log2().ceil() as u32 + (2.9 * x.to_f64()).ceil() as u32;
    let x = Float::with_val(prec, x);
    let mu = Float::with_val(prec, nu0 - &base);

    let (k_mu, k_mu1) = temme_pair(&mu, &x, prec);
    let two_over_x = Float::with_val(prec, 2 / &x);
    let mut out = Vec::with_capacity(count);
    let mut prev = k_mu;
    let mut cur = k_mu1;
    if shift == 0 {
        out.push(Float::with_val(out_prec, &prev));
    }
    if shift <= 1 && top > 1 {
        out.push(Float::with_val(out_prec, &cur));
    }
    for i in 1..top.saturating_sub(1) {
        let order = Float::with_val(prec, &mu + i as u32);
        let next = Float::with_val(prec, &two_over_x * &order) * &cur + &prev;
        prev = std::mem::replace(&mut cur, next);
        if i + 1 >= shift {
            out.push(Float::with_val(out_prec, &cur));
        }
    }
    debug_assert_eq!(out.len(), count);
    Ok(out)
}

/// `(K_mu(x), K_{mu+1}(x))` for `|mu| <= 1/2` by Temme's series.
fn temme_pair(mu: &Float, x: &Float, prec: u32) -> (Float, Float) {
    // 1/Gamma(1 - mu) - 1/Gamma(1 + mu) loses about log2(1/|mu|) bits.
    let tiny = mu.is_zero() || mu.get_exp().unwrap_or(0) < -(prec as i32 / 2);
    let lift = if tiny { 0 } else { (-mu.get_exp().unwrap_or(0)).max(0) as u32 + 8 };
    let wp = prec + lift;
    let mu = Float::with_val(wp, mu);
    let one = Float::with_val(wp, 1);
    let x = Float::with_val(wp, x);

    let gammi = Float::with_val(wp, Float::with_val(wp, &one - &mu).gamma().recip_ref());
    let gampl = Float::with_val(wp, Float::with_val(wp, &one + &mu).gamma().recip_ref());
    let gam1 = if tiny {
        -euler_gamma(wp)
    } else {
        Float::with_val(wp, &gammi - &gampl) / Float::with_val(wp, &mu * 2u32)
    };
    let gam2 = Float::with_val(wp, &gammi + &gampl) / 2u32;

    let half_x = Float::with_val(wp, &x / 2u32);
    let d = -Float::with_val(wp, half_x.ln_ref());
    let e = Float::with_val(wp, &mu * &d);
    let fact = if mu.is_zero() {
        Float::with_val(wp, 1)
    } else {
        let pimu = pi(wp) * &mu;
        Float::with_val(wp, &pimu / Float::with_val(wp, pimu.sin_ref()))
    };
    let fact2 = if e.is_zero() {
        Float::with_val(wp, 1)
    } else {
        Float::with_val(wp, e.sinh_ref()) / &e
    };
    let mut ff = fact * (Float::with_val(wp, &gam1 * Float::with_val(wp, e.cosh_ref())) + gam2 * fact2 * &d);
    let mut sum = ff.clone();
    let exp_e = Float::with_val(wp, e.exp_ref());
    let mut p = Float::with_val(wp, &exp_e / &gampl) / 2u32;
    let mut q = Float::with_val(wp, Float::with_val(wp, &exp_e * &gammi).recip_ref()) / 2u32;
    let mut c = Float::with_val(wp, 1);
    let d2 = Float::with_val(wp, half_x.square_ref());
    let mut sum1 = p.clone();
    let mu2 = Float::with_val(wp, mu.square_ref());

    let mut i = 1u32;
    loop {
        let fi = Float::with_val(wp, i);
        let denom = Float::with_val(wp, fi.square_ref()) - &mu2;
        ff = (Float::with_val(wp, &ff * i) + &p + &q) / denom;
        c *= &d2;
        c /= i;
        p /= Float::with_val(wp, &fi - &mu);
        q /= Float::with_val(wp, &fi + &mu);
        let del = Float::with_val(wp, &c * &ff);
        sum += &del;
        let del1 = Float::with_val(wp, &p - Float::with_val(wp, &ff * i)) * &c;
        sum1 += &del1;
        if negligible(&del, &sum, wp) && negligible(&del1, &sum1, wp) {
            break;
        }
        i += 1;
    }
    let k1 = sum1 * 2u32 / &x;
    (Float::with_val(prec, sum), Float::with_val(prec, k1))
}

fn negligible(term: &Float, total: &Float, prec: u32) -> bool {
    if term.is_zero() {
        return true;
    }
    match (term.get_exp(), total.get_exp()) {
        (Some(a), Some(b)) => a < b - prec as i32 - 2,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::rel_diff;

    fn ctx(bits: u32) -> PrecisionCtx {
        PrecisionCtx::with_bits(bits).unwrap()
    }

    #[test]
    fn half_order_closed_form() {
        let c = ctx(256);
        for xv in [0.1, 1.0, 3.0, 25.0] {
            let x = c.real(xv);
            let k = bessel_k(&c.real(0.5), &x, &c).unwrap();
            let exact = (pi(c.work_bits()) / Float::with_val(c.work_bits(), &x * 2u32)).sqrt()
                * Float::with_val(c.work_bits(), -&x).exp();
            assert!(rel_diff(&k, &exact) < c.epsilon(), "x = {xv}");
        }
    }

    #[test]
    fn integer_orders_match_reference() {
        // Reference digits from an independent multiprecision library.
        let c = ctx(128);
        let cases = [
            (0.0, 1.0, "0.42102443824070833333562737921260903613621974822666"),
            (1.0, 1.0, "0.60190723019723457473754000153561733926158688996811"),
            (3.0, 2.0, "0.64738539094863415315923557097119673765835700330216"),
        ];
        for (nu, x, want) in cases {
            let k = bessel_k(&c.real(nu), &c.real(x), &c).unwrap();
            let want = crate::numkernel::parse_real(want, 200).unwrap();
            let tol = Float::with_val(64, 1e-45);
            assert!(rel_diff(&k, &want) < tol, "K_{nu}({x}) = {k}");
        }
    }

    #[test]
    fn ladder_agrees_with_single_orders() {
        let c = ctx(200);
        let x = c.real(3);
        let ladder = bessel_k_ladder(&c.real(0.25), 6, &x, &c).unwrap();
        for (i, k) in ladder.iter().enumerate() {
            let direct = bessel_k(&c.real(0.25 + i as f64), &x, &c).unwrap();
            assert!(rel_diff(k, &direct) < c.epsilon());
        }
    }

    #[test]
    fn tiny_fractional_order_is_continuous() {
        let c = ctx(128);
        let x = c.real(0.7);
        let k0 = bessel_k(&c.real(0), &x, &c).unwrap();
        let tiny = Float::with_val(c.work_bits(), 1) >> 100u32;
        let kt = bessel_k(&tiny, &x, &c).unwrap();
        assert!(rel_diff(&k0, &kt) < Float::with_val(64, 1e-50));
    }

    #[test]
    fn domain_errors() {
        let c = ctx(64);
        assert!(bessel_k(&c.real(1), &c.real(0), &c).is_err());
        assert!(bessel_k(&c.real(-1), &c.real(1), &c).is_err());
    }
}
