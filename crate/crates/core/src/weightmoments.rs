//! The weight `x^a e^{-x-t/x}` and its power moments.

use crate::error::{Error, Result};
use crate::numkernel::{bessel_k_ladder, gamma, parse_real, to_decimal, Decimal, PrecisionCtx, Real};
use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

/// Deepest negative moment index ever needed (three t-derivatives of `mu_0`).
pub const JMIN: i64 = -3;

/// Exponent `alpha > 0` and perturbation `t >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightParams {
    alpha: Decimal,
    t: Decimal,
}

impl WeightParams {
    pub fn new(alpha: Decimal, t: Decimal) -> Result<Self> {
        if !alpha.is_positive() {
            return Err(Error::Domain("alpha must be > 0".into()));
        }
        if t.is_negative() {
            return Err(Error::Domain("t must be >= 0".into()));
        }
        Ok(Self { alpha, t })
    }

    pub fn parse(alpha: &str, t: &str) -> Result<Self> {
        Self::new(alpha.parse()?, t.parse()?)
    }

    pub fn alpha(&self) -> &Decimal {
        &self.alpha
    }

    pub fn t(&self) -> &Decimal {
        &self.t
    }

    /// The unperturbed Laguerre weight.
    pub fn is_classical(&self) -> bool {
        self.t.is_zero()
    }

    pub fn with_t(&self, t: Decimal) -> Result<Self> {
        Self::new(self.alpha.clone(), t)
    }
}

/// `x^a e^{-x-t/x}` for `x > 0`.
pub fn weight_eval(x: &Real, params: &WeightParams) -> Result<Real> {
    if *x <= 0 {
        return Err(Error::Domain("weight needs x > 0".into()));
    }
    let prec = x.prec();
    let alpha = params.alpha.to_real(prec);
    let t = params.t.to_real(prec);
    let expo = Float::with_val(prec, &t / x) + x;
    Ok(Float::with_val(prec, x.pow(&alpha)) * Float::with_val(prec, (-expo).exp_ref()))
}

/// `mu_j = int_0^inf x^j w(x) dx`.
///
/// For `t > 0` this is `2 t^{nu/2} K_nu(2 sqrt t)` with `nu = j + a + 1`
/// (and `K_{-nu} = K_nu`); for `t = 0` it is `Gamma(j + a + 1)`.
pub fn moment(j: i64, params: &WeightParams, ctx: &PrecisionCtx) -> Result<Real> {
    Ok(MomentTable::build(params, j, j, ctx)?.values.pop().expect("one moment"))
}

/// `d^m mu_j / dt^m = (-1)^m mu_{j-m}`.
pub fn moment_dt(j: i64, m: u32, params: &WeightParams, ctx: &PrecisionCtx) -> Result<Real> {
    if params.is_classical() {
        return Err(Error::Domain("t-derivatives of moments need t > 0".into()));
    }
    let idx = j - m as i64;
    if idx < JMIN {
        return Err(Error::IndexWindow { j: idx, jmin: JMIN });
    }
    let mu = moment(idx, params, ctx)?;
    Ok(if m % 2 == 1 { -mu } else { mu })
}

/// Moments `mu_jmin ..= mu_jmax` at one precision.
#[derive(Clone, Debug)]
pub struct MomentTable {
    params: WeightParams,
    jmin: i64,
    jmax: i64,
    bits: u32,
    values: Vec<Real>,
}

impl MomentTable {
    pub fn build(params: &WeightParams, jmin: i64, jmax: i64, ctx: &PrecisionCtx) -> Result<Self> {
        if jmax < jmin {
            return Err(Error::Domain(format!("empty moment window [{jmin}, {jmax}]")));
        }
        if jmin < JMIN {
            return Err(Error::IndexWindow { j: jmin, jmin: JMIN });
        }
        let prec = ctx.work_bits();
        let alpha = params.alpha.to_real(prec);
        let values = if params.is_classical() {
            if jmin < 0 {
                return Err(Error::Domain("negative moments diverge at t = 0".into()));
            }
            classical_moments(&alpha, jmin, jmax, ctx)?
        } else {
            bessel_moments(&alpha, &params.t.to_real(prec), jmin, jmax, ctx)?
        };
        Ok(Self { params: params.clone(), jmin, jmax, bits: ctx.bits(), values })
    }

    pub fn params(&self) -> &WeightParams {
        &self.params
    }

    pub fn jmin(&self) -> i64 {
        self.jmin
    }

    pub fn jmax(&self) -> i64 {
        self.jmax
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn get(&self, j: i64) -> Result<&Real> {
        if j < self.jmin {
            return Err(Error::IndexWindow { j, jmin: self.jmin });
        }
        self.values
            .get((j - self.jmin) as usize)
            .ok_or_else(|| Error::Domain(format!("moment index {j} beyond window end {}", self.jmax)))
    }

    pub fn values(&self) -> &[Real] {
        &self.values
    }

    pub fn to_json(&self) -> MomentTableJson {
        MomentTableJson {
            alpha: self.params.alpha.clone(),
            t: self.params.t.clone(),
            bits: self.bits,
            jmin: self.jmin,
            jmax: self.jmax,
            values: self.values.iter().map(to_decimal).collect(),
        }
    }

    pub fn from_json(doc: &MomentTableJson, guard_bits: u32) -> Result<Self> {
        let params = WeightParams::new(doc.alpha.clone(), doc.t.clone())?;
        let prec = doc.bits + guard_bits;
        let values = doc.values.iter().map(|v| parse_real(v, prec)).collect::<Result<Vec<_>>>()?;
        if values.len() as i64 != doc.jmax - doc.jmin + 1 {
            return Err(Error::Domain("moment count does not match the index window".into()));
        }
        Ok(Self { params, jmin: doc.jmin, jmax: doc.jmax, bits: doc.bits, values })
    }
}

/// External JSON form of a [`MomentTable`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentTableJson {
    pub alpha: Decimal,
    pub t: Decimal,
    pub bits: u32,
    pub jmin: i64,
    pub jmax: i64,
    pub values: Vec<String>,
}

fn classical_moments(alpha: &Real, jmin: i64, jmax: i64, ctx: &PrecisionCtx) -> Result<Vec<Real>> {
    let prec = ctx.work_bits();
    let first = gamma(&Float::with_val(prec, alpha + (jmin + 1)), ctx)?;
    let mut out = vec![first];
    for j in jmin + 1..=jmax {
        let prev = out.last().expect("seeded");
        out.push(Float::with_val(prec, prev * Float::with_val(prec, alpha + j)));
    }
    Ok(out)
}

fn bessel_moments(alpha: &Real, t: &Real, jmin: i64, jmax: i64, ctx: &PrecisionCtx) -> Result<Vec<Real>> {
    let prec = ctx.work_bits();
    // A few extra bits absorb the rounding of t^{nu/2}.
    let inner = ctx.widened(16);
    let wp = inner.work_bits();
    let x = Float::with_val(wp, t.sqrt_ref()) * 2u32;
    let order = |j: i64| Float::with_val(wp, alpha + (j + 1));

    // Orders nu_j = j + a + 1 are negative for the first few j when a is
    // small; those use K_{|nu|} from a second ladder.
    let first_nonneg = (jmin..=jmax).find(|&j| order(j) >= 0).unwrap_or(jmax + 1);
    let mut k = vec![Float::new(wp); (jmax - jmin + 1) as usize];
    if first_nonneg <= jmax {
        let ladder = bessel_k_ladder(&order(first_nonneg), (jmax - first_nonneg + 1) as usize, &x, &inner)?;
        for (i, v) in ladder.into_iter().enumerate() {
            k[(first_nonneg - jmin) as usize + i] = v;
        }
    }
    if first_nonneg > jmin {
        // |nu| decreases as j increases; ladder from the smallest |nu| upward.
        let last_neg = first_nonneg - 1;
        let base = Float::with_val(wp, -order(last_neg));
        let ladder = bessel_k_ladder(&base, (last_neg - jmin + 1) as usize, &x, &inner)?;
        for (i, v) in ladder.into_iter().enumerate() {
            k[(last_neg - jmin) as usize - i] = v;
        }
    }
    let ln_t = Float::with_val(wp, t.ln_ref());
    Ok((jmin..=jmax)
        .zip(k)
        .map(|(j, kv)| {
            let half_nu = order(j) / 2u32;
            let scale = Float::with_val(wp, Float::with_val(wp, &half_nu * &ln_t).exp_ref());
            Float::with_val(prec, scale * kv * 2u32)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::rel_diff;

    fn params(a: &str, t: &str) -> WeightParams {
        WeightParams::parse(a, t).unwrap()
    }

    #[test]
    fn weight_values() {
        let x = Real::with_val(128, 1);
        let w = weight_eval(&x, &params("2", "1")).unwrap();
        let want = Real::with_val(128, -2).exp();
        assert!(rel_diff(&w, &want) < 1e-36);
        let w = weight_eval(&x, &params("0.5", "0")).unwrap();
        assert!(rel_diff(&w, &Real::with_val(128, -1).exp()) < 1e-36);
        assert!(weight_eval(&Real::with_val(64, 0), &params("1", "1")).is_err());
    }

    #[test]
    fn weight_vanishes_at_origin() {
        let p = params("0.3", "0.2");
        let mut last = Real::with_val(128, f64::INFINITY);
        for k in 1..30 {
            let x = Real::with_val(128, 2.0f64.powi(-k));
            let w = weight_eval(&x, &p).unwrap();
            assert!(w < last);
            last = w;
        }
        assert!(last.get_exp().unwrap() < -1_000_000);
    }

    #[test]
    fn rejects_bad_params() {
        assert_eq!(WeightParams::parse("0", "1"), Err(Error::Domain("alpha must be > 0".into())));
        assert!(WeightParams::parse("1", "-0.1").is_err());
    }

    #[test]
    fn classical_moments_are_gamma() {
        let ctx = PrecisionCtx::with_bits(128).unwrap();
        let table = MomentTable::build(&params("1", "0"), 0, 5, &ctx).unwrap();
        let want = [1u32, 2, 6, 24, 120, 720];
        for (v, w) in table.values().iter().zip(want) {
            assert_eq!(*v, w);
        }
        assert!(moment(-1, &params("1", "0"), &ctx).is_err());
    }

    #[test]
    fn derivative_window() {
        let ctx = PrecisionCtx::with_bits(128).unwrap();
        let p = params("1.5", "1");
        let d = moment_dt(3, 1, &p, &ctx).unwrap();
        let m2 = moment(2, &p, &ctx).unwrap();
        assert_eq!(d, -m2);
        let d3 = moment_dt(1, 3, &p, &ctx).unwrap();
        assert_eq!(d3, -moment(-2, &p, &ctx).unwrap());
        assert!(matches!(moment_dt(0, 4, &p, &ctx), Err(Error::IndexWindow { j: -4, .. })));
    }

    #[test]
    fn table_matches_single_moments() {
        let ctx = PrecisionCtx::with_bits(200).unwrap();
        // alpha small enough that the first orders are negative.
        let p = params("0.4", "2.5");
        let table = MomentTable::build(&p, JMIN, 12, &ctx).unwrap();
        for j in JMIN..=12 {
            let single = moment(j, &p, &ctx).unwrap();
            assert!(rel_diff(table.get(j).unwrap(), &single) < ctx.epsilon(), "j = {j}");
        }
    }

    #[test]
    fn json_round_trip() {
        let ctx = PrecisionCtx::with_bits(160).unwrap();
        let table = MomentTable::build(&params("1.5", "0.7"), JMIN, 6, &ctx).unwrap();
        let doc = table.to_json();
        let text = serde_json::to_string(&doc).unwrap();
        let back: MomentTableJson = serde_json::from_str(&text).unwrap();
        let again = MomentTable::from_json(&back, ctx.guard_bits()).unwrap();
        assert_eq!(again.values(), table.values());
        assert!(text.contains("\"alpha\":\"1.5\""));
    }
}
