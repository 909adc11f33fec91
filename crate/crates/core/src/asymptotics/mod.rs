//! Leading-order predictions from the transcendent `r(s)` at `s = 2nt`,
//! their comparison with the finite-n quantities, and empirical orders.

use crate::error::{Error, Result};
use crate::numkernel::{ln_gamma, to_decimal, Decimal, PrecisionCtx, Real};
use crate::orthopoly::FiniteCell;
use crate::painleve::PIIISolution;
use crate::weightmoments::WeightParams;
use rug::Float;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

/// A quantity with both a finite-n value and a prediction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(into = "String")]
pub enum Quantity {
    LnD,
    H,
    A,
    AlphaN,
    BetaN,
    GammaN,
}

impl Quantity {
    pub const ALL: [Quantity; 6] =
        [Quantity::LnD, Quantity::H, Quantity::A, Quantity::AlphaN, Quantity::BetaN, Quantity::GammaN];

    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::LnD => "ln_d",
            Quantity::H => "h",
            Quantity::A => "a_n",
            Quantity::AlphaN => "alpha_n",
            Quantity::BetaN => "beta_n",
            Quantity::GammaN => "gamma_n",
        }
    }
}

impl From<Quantity> for String {
    fn from(q: Quantity) -> String {
        q.as_str().to_string()
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown quantity '{s}'")))
    }
}

/// How the `(n, t)` grid scales.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(into = "String")]
pub enum Regime {
    /// `t = s / (2n)` with `s` held fixed.
    FixedS,
    /// `t` held fixed.
    FixedT,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::FixedS => "fixed-s",
            Regime::FixedT => "fixed-t",
        }
    }
}

impl From<Regime> for String {
    fn from(r: Regime) -> String {
        r.as_str().to_string()
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Leading-order values predicted from `(r(s), r'(s))`.
#[derive(Clone, Debug)]
pub struct Prediction {
    pub n: usize,
    pub params: WeightParams,
    pub s: Real,
    pub r: Real,
    pub rprime: Real,
    pub ln_d: Real,
    /// `ln D_n` at `t = 0`.
    pub ln_d_classical: Real,
    /// `-(1/2) int_0^s (r - r(0))/x dx`, the `t`-dependent part of `ln D_n`.
    pub ln_d_correction: Real,
    pub h: Real,
    pub a: Real,
    pub alpha_n: Real,
    pub beta_n: Real,
    /// `(4a^2 - 1 + 8r - 8 s r') / 16`.
    pub beta_correction: Real,
    pub gamma_n: Real,
    /// `gamma_n(0) = 1 / sqrt(n! Gamma(n+1+a))`.
    pub gamma_classical: Real,
    /// `(8r + 4a^2 - 1) / (32n)`.
    pub gamma_correction: Real,
}

/// `ln D_n` at `t = 0`: `sum_{k<n} ln(k! Gamma(k+1+a))`.
pub fn classical_ln_d(n: usize, alpha: &Decimal, ctx: &PrecisionCtx) -> Result<Real> {
    let prec = ctx.work_bits();
    let a = alpha.to_real(prec);
    let mut acc = Float::new(prec);
    for k in 0..n {
        acc += ln_gamma(&Float::with_val(prec, k + 1), ctx)?;
        acc += ln_gamma(&(Float::with_val(prec, &a + (k + 1) as u32)), ctx)?;
    }
    Ok(acc)
}

fn scaling_variable(n: usize, params: &WeightParams) -> Decimal {
    params.t().mul_int(2 * n as i64)
}

/// All leading-order predictions at `s = 2nt`.
pub fn predict_leading(n: usize, params: &WeightParams, sol: &PIIISolution) -> Result<Prediction> {
    if n == 0 {
        return Err(Error::Domain("n must be >= 1".into()));
    }
    if params.alpha() != sol.alpha() {
        return Err(Error::Domain("solution was computed for a different alpha".into()));
    }
    let prec = sol.prec();
    let ctx = PrecisionCtx::new(prec, 0)?;
    let a = params.alpha().to_real(prec);
    let nn = Float::with_val(prec, n as u32);
    let s_dec = scaling_variable(n, params);
    let s = s_dec.to_real(prec);
    let ln_d_classical = classical_ln_d(n, params.alpha(), &ctx)?;
    let four_a2_m1 = Float::with_val(prec, a.square_ref()) * 4u32 - 1u32;
    let classical_norm = ln_gamma(&Float::with_val(prec, n + 1), &ctx)?
        + ln_gamma(&Float::with_val(prec, &a + (n + 1) as u32), &ctx)?;
    let gamma_classical = (-classical_norm / 2u32).exp();
    let base_alpha = Float::with_val(prec, &nn * 2u32) + &a + 1u32;
    let base_beta = Float::with_val(prec, &nn + &a) * &nn;

    if s_dec.is_zero() {
        let zero = Float::new(prec);
        return Ok(Prediction {
            n,
            params: params.clone(),
            s,
            r: sol.seed().r_origin(),
            rprime: sol.seed().leading_coefficient(),
            ln_d: ln_d_classical.clone(),
            ln_d_classical,
            ln_d_correction: zero.clone(),
            h: zero.clone(),
            a: zero.clone(),
            alpha_n: base_alpha,
            beta_n: base_beta,
            beta_correction: zero.clone(),
            gamma_n: gamma_classical.clone(),
            gamma_classical,
            gamma_correction: zero,
        });
    }

    let p = sol.eval(&s)?;
    let ln_d_correction = Float::with_val(prec, -&p.integral) / 2u32;
    let ln_d = Float::with_val(prec, &ln_d_classical + &ln_d_correction);
    let eight_r = Float::with_val(prec, &p.r * 8u32);
    let h = -(Float::with_val(prec, &eight_r + &four_a2_m1)) / 16u32;
    let s_rp = Float::with_val(prec, &s * &p.rprime);
    let a_pred = Float::with_val(prec, &s_rp / Float::with_val(prec, &nn * 2u32));
    let alpha_n = Float::with_val(prec, &base_alpha + &a_pred);
    let beta_correction =
        (Float::with_val(prec, &four_a2_m1 + &eight_r) - Float::with_val(prec, &s_rp * 8u32)) / 16u32;
    let beta_n = Float::with_val(prec, &base_beta + &beta_correction);
    let gamma_correction = (eight_r + &four_a2_m1) / Float::with_val(prec, &nn * 32u32);
    let gamma_n = Float::with_val(prec, &gamma_correction + 1u32) * &gamma_classical;
    Ok(Prediction {
        n,
        params: params.clone(),
        s,
        r: p.r,
        rprime: p.rprime,
        ln_d,
        ln_d_classical,
        ln_d_correction,
        h,
        a: a_pred,
        alpha_n,
        beta_n,
        beta_correction,
        gamma_n,
        gamma_classical,
        gamma_correction,
    })
}

/// `ln D_n[w; 0] + int_0^t (1 - 4a^2 - 8 r(2n x)) / (16 x) dx`.
pub fn predict_ln_d(n: usize, params: &WeightParams, sol: &PIIISolution) -> Result<Real> {
    Ok(predict_leading(n, params, sol)?.ln_d)
}

/// Limit of the `ln D_n` integrand at `s = 0`: `-r'(0)/2 = -1/(2a)`.
pub fn ln_dn_integrand_at_origin(sol: &PIIISolution) -> Real {
    -sol.seed().leading_coefficient() / 2u32
}

/// One finite-n cell with its prediction.
#[derive(Clone, Debug)]
pub struct ComparisonCell {
    pub n: usize,
    pub params: WeightParams,
    pub finite: FiniteCell,
    pub predicted: Prediction,
}

impl ComparisonCell {
    pub fn new(finite: FiniteCell, params: &WeightParams, sol: &PIIISolution) -> Result<Self> {
        let predicted = predict_leading(finite.n, params, sol)?;
        Ok(Self { n: finite.n, params: params.clone(), finite, predicted })
    }

    pub fn compute(n: usize, params: &WeightParams, sol: &PIIISolution, ctx: &PrecisionCtx) -> Result<Self> {
        Self::new(FiniteCell::compute(n, params, ctx)?, params, sol)
    }

    /// `(finite, predicted, abs_err, rel_err)` for a quantity.
    ///
    /// Relative errors are taken against the part that the prediction
    /// actually adds to the classical value: the predicted integral for `ln D_n`,
    /// `a_n` for `alpha_n`, `beta_n - n(n+a)` for `beta_n` and
    /// `gamma_n / gamma_n(0) - 1` for `gamma_n`.
    pub fn errors(&self, q: Quantity) -> (Real, Real, Real, Real) {
        let f = &self.finite;
        let p = &self.predicted;
        let prec = f.ln_d.prec().max(p.ln_d.prec());
        let abs = |x: &Real, y: &Real| Float::with_val(prec, x - y).abs();
        let (finite, predicted, scale_num, scale_den) = match q {
            Quantity::LnD => (f.ln_d.clone(), p.ln_d.clone(), abs(&f.ln_d, &p.ln_d), p.ln_d_correction.clone()),
            Quantity::H => (f.h.clone(), p.h.clone(), abs(&f.h, &p.h), f.h.clone()),
            Quantity::A => (f.a_n.clone(), p.a.clone(), abs(&f.a_n, &p.a), f.a_n.clone()),
            Quantity::AlphaN => (f.alpha_n.clone(), p.alpha_n.clone(), abs(&f.alpha_n, &p.alpha_n), f.a_n.clone()),
            Quantity::BetaN => {
                let a = self.params.alpha().to_real(prec);
                let nn = Float::with_val(prec, self.n as u32);
                let excess = Float::with_val(prec, &f.beta_n - Float::with_val(prec, &nn + &a) * &nn);
                (f.beta_n.clone(), p.beta_n.clone(), abs(&f.beta_n, &p.beta_n), excess)
            }
            Quantity::GammaN => {
                let ratio_f = Float::with_val(prec, &f.gamma_n / &p.gamma_classical);
                let ratio_p = Float::with_val(prec, &p.gamma_correction + 1u32);
                let rel_num = abs(&ratio_f, &ratio_p);
                let excess = Float::with_val(prec, &ratio_f - 1u32);
                let abs_err = abs(&f.gamma_n, &p.gamma_n);
                let rel = rel_num / excess.abs();
                return (f.gamma_n.clone(), p.gamma_n.clone(), abs_err, rel);
            }
        };
        let rel = Float::with_val(prec, &scale_num / scale_den.abs());
        (finite, predicted, scale_num, rel)
    }
}

/// One CSV row of an error report.
#[derive(Clone, Debug)]
pub struct ErrorRow {
    pub quantity: Quantity,
    pub regime: Regime,
    pub n: usize,
    pub t: Decimal,
    pub s: Decimal,
    pub finite: Real,
    pub predicted: Real,
    pub abs_err: Real,
    pub rel_err: Real,
}

pub const CSV_HEADER: &str = "quantity,regime,n,t,s,finite_value,predicted,abs_err,rel_err";

impl ErrorRow {
    pub fn from_cell(q: Quantity, regime: Regime, cell: &ComparisonCell) -> Self {
        let (finite, predicted, abs_err, rel_err) = cell.errors(q);
        Self {
            quantity: q,
            regime,
            n: cell.n,
            t: cell.params.t().clone(),
            s: scaling_variable(cell.n, &cell.params),
            finite,
            predicted,
            abs_err,
            rel_err,
        }
    }

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.quantity,
            self.regime,
            self.n,
            self.t,
            self.s,
            to_decimal(&self.finite),
            to_decimal(&self.predicted),
            to_decimal(&self.abs_err),
            to_decimal(&self.rel_err)
        )
    }
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in `ln y`.
    pub residual: f64,
}

pub fn fit_log_log(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.len() < 2 {
        return Err(Error::InsufficientGrid { need: 2, got: points.len() });
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0 && y.is_finite())) {
        return Err(Error::Domain("log-log fit needs positive finite data".into()));
    }
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(LogLogFit { slope, intercept, residual: (ss / m).sqrt() })
}

/// Errors of one quantity over an `n` grid.
#[derive(Clone, Debug)]
pub struct ErrorReport {
    pub quantity: Quantity,
    pub regime: Regime,
    pub rows: Vec<ErrorRow>,
}

impl ErrorReport {
    pub fn new(quantity: Quantity, regime: Regime, cells: &[ComparisonCell]) -> Self {
        let rows = cells.iter().map(|c| ErrorRow::from_cell(quantity, regime, c)).collect();
        Self { quantity, regime, rows }
    }

    fn points(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.n as f64, r.rel_err.to_f64())).collect()
    }

    /// Slope of `ln rel_err` against `ln n`.
    pub fn fit(&self) -> Result<LogLogFit> {
        fit_log_log(&self.points())
    }

    /// Relative errors strictly decrease along the grid.
    pub fn monotone_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].rel_err < w[0].rel_err)
    }

    /// Smallest `C` with `rel_err <= C n^{exponent}` on the grid.
    pub fn bound_constant(&self, exponent: f64) -> f64 {
        self.points().iter().map(|&(n, e)| e / n.powf(exponent)).fold(0.0, f64::max)
    }

    pub fn csv_rows(&self) -> Vec<String> {
        self.rows.iter().map(ErrorRow::csv).collect()
    }
}

/// Error report with fitted order; needs at least four grid points.
pub fn convergence_order(quantity: Quantity, regime: Regime, cells: &[ComparisonCell]) -> Result<(ErrorReport, LogLogFit)> {
    if cells.len() < 4 {
        return Err(Error::InsufficientGrid { need: 4, got: cells.len() });
    }
    let report = ErrorReport::new(quantity, regime, cells);
    let fit = report.fit()?;
    Ok((report, fit))
}

/// Full predictor against the two limiting forms at one `s`.
#[derive(Clone, Debug)]
pub struct TransitionRow {
    pub n: usize,
    pub s: Decimal,
    pub h_full: Real,
    /// `-s / (2a)`.
    pub h_small: Real,
    /// `-(3/4) s^{2/3}`.
    pub h_large: Real,
    /// `alpha_n - (2n + a + 1) = s r' / (2n)`.
    pub excess_full: Real,
    /// `s / (2 a n)`.
    pub excess_small: Real,
    /// `s^{2/3} / (2n)`.
    pub excess_large: Real,
    /// `beta_n - n(n + a)`.
    pub beta_full: Real,
    /// `s^{2/3} / 4`.
    pub beta_large: Real,
}

fn rel(a: &Real, b: &Real) -> f64 {
    let prec = a.prec();
    (Float::with_val(prec, a - b) / a).to_f64().abs()
}

impl TransitionRow {
    pub fn h_small_rel(&self) -> f64 {
        rel(&self.h_full, &self.h_small)
    }

    pub fn h_large_rel(&self) -> f64 {
        rel(&self.h_full, &self.h_large)
    }

    pub fn excess_small_rel(&self) -> f64 {
        rel(&self.excess_full, &self.excess_small)
    }

    pub fn excess_large_rel(&self) -> f64 {
        rel(&self.excess_full, &self.excess_large)
    }

    pub fn beta_large_rel(&self) -> f64 {
        rel(&self.beta_full, &self.beta_large)
    }
}

pub const TRANSITION_CSV_HEADER: &str = "n,s,h_full,h_small,h_large,alpha_excess_full,alpha_excess_small,\
alpha_excess_large,beta_excess_full,beta_excess_large,h_small_rel,h_large_rel,alpha_small_rel,alpha_large_rel,\
beta_large_rel";

impl TransitionRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{:e},{:e},{:e},{:e},{:e}",
            self.n,
            self.s,
            to_decimal(&self.h_full),
            to_decimal(&self.h_small),
            to_decimal(&self.h_large),
            to_decimal(&self.excess_full),
            to_decimal(&self.excess_small),
            to_decimal(&self.excess_large),
            to_decimal(&self.beta_full),
            to_decimal(&self.beta_large),
            self.h_small_rel(),
            self.h_large_rel(),
            self.excess_small_rel(),
            self.excess_large_rel(),
            self.beta_large_rel()
        )
    }
}

/// Evaluate the small-s and large-s forms next to the full predictor on an
/// `s` grid (`t = s / (2n)`).
pub fn transition_table(n: usize, sol: &PIIISolution, s_grid: &[Decimal]) -> Result<Vec<TransitionRow>> {
    let prec = sol.prec();
    let a = sol.alpha().to_real(prec);
    let nn = Float::with_val(prec, n as u32);
    s_grid
        .iter()
        .map(|s_dec| {
            let t = s_dec.div_int(2 * n as i64);
            let params = WeightParams::new(sol.alpha().clone(), t)?;
            let p = predict_leading(n, &params, sol)?;
            let s = s_dec.to_real(prec);
            let s23 = Float::with_val(prec, s.cbrt_ref()).square();
            Ok(TransitionRow {
                n,
                s: s_dec.clone(),
                h_full: p.h,
                h_small: -Float::with_val(prec, &s / &a) / 2u32,
                h_large: -Float::with_val(prec, &s23 * 3u32) / 4u32,
                excess_full: p.a,
                excess_small: Float::with_val(prec, &s / &a) / Float::with_val(prec, &nn * 2u32),
                excess_large: Float::with_val(prec, &s23 / Float::with_val(prec, &nn * 2u32)),
                beta_full: p.beta_correction,
                beta_large: Float::with_val(prec, &s23 / 4u32),
            })
        })
        .collect()
}
