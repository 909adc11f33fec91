use super::*;
use crate::numkernel::{parse_real, rel_diff, Decimal, PrecisionCtx};
use crate::Error;
use rug::Float;

fn dec(s: &str) -> Decimal {
    s.parse().unwrap()
}

fn ctx() -> PrecisionCtx {
    PrecisionCtx::with_bits(64).unwrap()
}

fn abs_f64(x: &Float) -> f64 {
    x.to_f64().abs()
}

#[test]
fn values_at_one_match_reference() {
    // Reference from an independent 60-digit integration of the same
    // boundary problem.
    let sol = integrate(&dec("1"), &dec("10"), &dec("1e-30"), &ctx()).unwrap();
    let p = sol.eval(&Float::with_val(sol.prec(), 1)).unwrap();
    let r = parse_real("0.3990612448278120202626112676157717262468", sol.prec()).unwrap();
    let rp = parse_real("0.6725220618195701631702951117887230613359", sol.prec()).unwrap();
    assert!(abs_f64(&Float::with_val(sol.prec(), &p.r - &r)) < 1e-30);
    assert!(abs_f64(&Float::with_val(sol.prec(), &p.rprime - &rp)) < 1e-30);
}

#[test]
fn origin_limits() {
    for a in ["0.5", "1", "2", "1.25"] {
        let sol = integrate(&dec(a), &dec("5"), &dec("1e-25"), &ctx()).unwrap();
        let (r0, rp0) = sol.origin_limits();
        let af = dec(a).to_f64();
        assert!((r0.to_f64() - (1.0 - 4.0 * af * af) / 8.0).abs() < 1e-20, "alpha {a}");
        assert!((rp0.to_f64() - 1.0 / af).abs() < 1e-20, "alpha {a}");
    }
}

#[test]
fn shooting_brackets_the_connection_constant() {
    // Below the separatrix v reaches zero, above it hits a pole. Bisection on
    // the free coefficient recovers the constant without using its formula.
    let a = dec("1");
    let (smax, tol) = (dec("400"), dec("1e-20"));
    let (prec, k) = working_plan(&smax, &tol, &ctx()).unwrap();
    let exact = connection_constant(&a, prec).unwrap();
    let classify = |c: &Float| -> i32 {
        let seed = seed_with_connection(&a, k, prec, c.clone()).unwrap();
        match integrate_from_seed(seed, &smax, &tol, &ctx()) {
            Err(Error::DenominatorGuard { .. }) => -1,
            Err(Error::StepCollapse { .. }) => 1,
            Ok(_) => 0,
            Err(e) => panic!("{e}"),
        }
    };
    let mut lo = Float::with_val(prec, 0.2);
    let mut hi = Float::with_val(prec, 0.35);
    assert_eq!(classify(&lo), -1);
    assert_eq!(classify(&hi), 1);
    for _ in 0..40 {
        let mid = Float::with_val(prec, &lo + &hi) / 2u32;
        match classify(&mid) {
            -1 => lo = mid,
            1 => hi = mid,
            _ => break,
        }
    }
    assert!(lo <= exact && exact <= hi || abs_f64(&Float::with_val(prec, &lo - &exact)) < 1e-11);
    assert!(abs_f64(&Float::with_val(prec, &hi - &lo)) < 1e-11);
}

#[test]
fn self_convergence_at_ten() {
    let tol = dec("1e-25");
    let coarse = integrate(&dec("1"), &dec("10"), &tol, &ctx()).unwrap();
    let fine = integrate(&dec("1"), &dec("10"), &tol.mul(&dec("0.01")), &ctx()).unwrap();
    let s = Float::with_val(fine.prec(), 10);
    let a = coarse.eval(&s).unwrap().r;
    let b = fine.eval(&s).unwrap().r;
    assert!(abs_f64(&Float::with_val(fine.prec(), &a - &b)) < 1e-24);
}

#[test]
fn residuals_certify_trajectory() {
    let sol = integrate(&dec("1"), &dec("100"), &dec("1e-25"), &ctx()).unwrap();
    assert!(abs_f64(&sol.first_integral_residual()) < 1e-20);
    let (free, reduced) = sol.third_order_residual();
    assert!(abs_f64(&free) < 1e-18);
    assert!(abs_f64(&reduced) < 1e-18);
    // The free third-order form is twice the reduced one plus the first integral.
    for nr in sol.node_residuals() {
        let combo = Float::with_val(sol.prec(), &nr.third_order * 2u32) + &nr.first_integral - &nr.third_order_free;
        assert!(abs_f64(&combo) < 1e-60);
    }
}

#[test]
fn third_order_residuals_on_inner_window() {
    let sol = integrate(&dec("1"), &dec("50"), &dec("1e-25"), &ctx()).unwrap();
    let a = sol.alpha().to_real(sol.prec());
    let mut s = Float::with_val(sol.prec(), 0.01);
    while s <= 50 {
        let nr = NodeResiduals::at(&sol.eval(&s).unwrap(), &a);
        assert!(abs_f64(&nr.third_order) < 1e-18 && abs_f64(&nr.third_order_free) < 1e-18, "s {}", s.to_f64());
        s *= 1.7;
    }
}

#[test]
fn residual_tracks_tolerance() {
    let loose = integrate(&dec("1"), &dec("20"), &dec("1e-20"), &ctx()).unwrap();
    let tight = integrate(&dec("1"), &dec("20"), &dec("1e-22"), &ctx()).unwrap();
    let a = abs_f64(&loose.first_integral_residual());
    let b = abs_f64(&tight.first_integral_residual());
    assert!(b < a / 10.0, "{a:e} {b:e}");
}

#[test]
fn handoff_residual_matches_series_accuracy() {
    let sol = integrate(&dec("2"), &dec("1"), &dec("1e-25"), &ctx()).unwrap();
    let first = &sol.node_residuals()[0];
    assert!(first.s == *sol.handoff());
    assert!(first.first_integral.clone().abs() < *sol.step_tolerance());
}

#[test]
fn dense_output_is_continuous_at_nodes() {
    let sol = integrate(&dec("0.5"), &dec("30"), &dec("1e-25"), &ctx()).unwrap();
    for pair in sol.nodes().windows(2).take(20) {
        let s = &pair[1].s;
        let below = Float::with_val(sol.prec(), s - Float::with_val(sol.prec(), s >> 200));
        let p = sol.eval(&below).unwrap();
        assert!(rel_diff(&p.v, &pair[1].v) < 1e-40);
        assert!(rel_diff(&p.r, &pair[1].r) < 1e-40);
    }
}

#[test]
fn tail_is_bounded_and_leading_ratio() {
    let sol = integrate(&dec("1"), &dec("10000"), &dec("1e-25"), &ctx()).unwrap();
    let tail = sol.tail_check().unwrap();
    assert!(tail.bounded);
    let dev = (tail.leading_ratio.to_f64() - 1.5).abs();
    assert!(dev < 5.0 * 10000f64.powf(-1.0 / 3.0));
    let short = integrate(&dec("1"), &dec("100"), &dec("1e-25"), &ctx()).unwrap();
    assert!(short.tail_check().is_err());
}

#[test]
fn alpha_shift_isolates_cube_root_term() {
    let s = 10000.0f64;
    let one = integrate(&dec("1"), &dec("10000"), &dec("1e-20"), &ctx()).unwrap();
    let two = integrate(&dec("2"), &dec("10000"), &dec("1e-20"), &ctx()).unwrap();
    let r1 = one.eval_decimal(&dec("10000")).unwrap().r.to_f64();
    let r2 = two.eval_decimal(&dec("10000")).unwrap().r.to_f64();
    let ratio = (r1 - r2) / s.cbrt();
    assert!((ratio - 1.0).abs() < 0.1, "{ratio}");
}

#[test]
fn cache_round_trip_is_exact() {
    let sol = integrate(&dec("1.5"), &dec("50"), &dec("1e-20"), &ctx()).unwrap();
    let doc = SolutionCache::from_solution(&sol, 0);
    let text = serde_json::to_string(&doc).unwrap();
    let back: SolutionCache = serde_json::from_str(&text).unwrap();
    let restored = back.restore(ctx().guard_bits()).unwrap();
    assert_eq!(restored.nodes(), sol.nodes());
    let s = Float::with_val(sol.prec(), 7.3);
    assert_eq!(restored.eval(&s).unwrap().r, sol.eval(&s).unwrap().r);

    let mut tampered = back.clone();
    tampered.nodes[3].v = "1.5".into();
    assert!(matches!(tampered.restore(ctx().guard_bits()), Err(Error::Cache(_))));
}

#[test]
fn rejects_bad_input() {
    assert!(integrate(&dec("0"), &dec("1"), &dec("1e-10"), &ctx()).is_err());
    assert!(integrate(&dec("1"), &dec("0"), &dec("1e-10"), &ctx()).is_err());
    assert!(integrate(&dec("1"), &dec("1"), &dec("0"), &ctx()).is_err());
    let sol = integrate(&dec("1"), &dec("2"), &dec("1e-10"), &ctx()).unwrap();
    assert!(matches!(sol.eval_decimal(&dec("3")), Err(Error::OutOfRange { .. })));
}
