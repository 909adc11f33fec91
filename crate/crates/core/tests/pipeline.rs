//! End-to-end use of the public API: moments feed the Hankel system, the
//! Painleve solution feeds the predictors.

use pertlag_core::asymptotics::{predict_leading, ComparisonCell, Quantity};
use pertlag_core::numkernel::rel_diff;
use pertlag_core::orthopoly::{build_system, dense_determinant, FiniteCell};
use pertlag_core::painleve::{integrate, SolutionCache};
use pertlag_core::weightmoments::moment;
use pertlag_core::{Decimal, PrecisionCtx, Real, WeightParams};
use rug::Float;

fn dec(s: &str) -> Decimal {
    s.parse().unwrap()
}

#[test]
fn factorised_determinant_matches_dense_elimination() {
    let params = WeightParams::parse("1.5", "0.3").unwrap();
    let ctx = PrecisionCtx::with_bits(400).unwrap();
    let n = 12;
    let sys = build_system(n + 2, &params, &ctx).unwrap();
    let cell = FiniteCell::from_system(&sys, n).unwrap();
    let prec = sys.prec();
    let entries: Vec<Real> = (0..n * n)
        .map(|k| Float::with_val(prec, moment((k / n + k % n) as i64, &params, &ctx).unwrap()))
        .collect();
    let dense = dense_determinant(entries, n);
    let from_ln = Float::with_val(prec, cell.ln_d.exp_ref());
    assert!(rel_diff(&dense, &from_ln) < 1e-80);
}

#[test]
fn prediction_tracks_finite_n_at_fixed_s() {
    let ctx = PrecisionCtx::with_bits(PrecisionCtx::MIN_BITS).unwrap();
    let sol = integrate(&dec("2"), &dec("4"), &dec("1e-20"), &ctx).unwrap();
    let mut errs = Vec::new();
    for n in [8usize, 16, 32] {
        let params = WeightParams::new(dec("2"), dec("4").div_int(2 * n as i64)).unwrap();
        let cell_ctx = PrecisionCtx::with_bits(128 + 12 * n as u32).unwrap();
        let cell = ComparisonCell::compute(n, &params, &sol, &cell_ctx).unwrap();
        let (_, _, _, rel) = cell.errors(Quantity::H);
        errs.push(rel.to_f64());
        let p = predict_leading(n, &params, &sol).unwrap();
        assert!(p.h.is_finite() && p.beta_n.is_finite());
    }
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    assert!(errs[2] < 0.05, "{errs:?}");
}

#[test]
fn cached_solution_survives_json() {
    let ctx = PrecisionCtx::with_bits(PrecisionCtx::MIN_BITS).unwrap();
    let sol = integrate(&dec("0.5"), &dec("30"), &dec("1e-20"), &ctx).unwrap();
    let text = serde_json::to_string(&SolutionCache::from_solution(&sol, 0)).unwrap();
    let back: SolutionCache = serde_json::from_str(&text).unwrap();
    let restored = back.restore(PrecisionCtx::DEFAULT_GUARD).unwrap();
    let s = Float::with_val(sol.prec(), 7.25);
    assert_eq!(sol.eval(&s).unwrap().r, restored.eval(&s).unwrap().r);
}
