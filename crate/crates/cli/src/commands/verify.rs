use crate::cache::{load_or_integrate, SolutionKey};
use crate::config::{
    parse_alpha, parse_decimal, parse_n_grid, parse_positive, parse_t_grid, resolve_cache_dir, RunConfig, Suite,
    VerifyArgs,
};
use crate::error::{CliError, CliResult};
use crate::output::{emit, render_table, summary_path, write_atomic, CellRecord, RunManifest};
use pertlag_core::asymptotics::{
    transition_table, ComparisonCell, ErrorReport, Quantity, Regime, CSV_HEADER as ERROR_CSV_HEADER,
    TRANSITION_CSV_HEADER,
};
use pertlag_core::orthopoly::{an_ode_residual, beta_identity, gamma_log_derivative, sigma_form_residual, with_policy};
use pertlag_core::{Decimal, Error as CoreError, FiniteCell, PIIISolution, PrecisionCtx, Real, WeightParams};
use rayon::prelude::*;
use rug::ops::Pow;
use rug::Float;
use serde::Serialize;
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok { Status::Pass } else { Status::Fail }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        }
    }
}

/// One assertion with the number it was judged on.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: String,
    pub threshold: String,
    pub status: Status,
}

impl Check {
    fn new(name: impl Into<String>, value: impl Into<String>, threshold: impl Into<String>, status: Status) -> Self {
        Self { name: name.into(), value: value.into(), threshold: threshold.into(), status }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {} (threshold {})", self.status.as_str(), self.name, self.value, self.threshold)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub quantity: String,
    pub regime: String,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// Table rows, assertions and fitted orders of one suite run.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub suite: String,
    #[serde(skip)]
    pub header: String,
    #[serde(skip)]
    pub rows: Vec<String>,
    pub checks: Vec<Check>,
    pub fits: Vec<FitSummary>,
    #[serde(skip)]
    pub cells: Vec<CellRecord>,
    #[serde(skip)]
    pub cache_hits: usize,
}

impl SuiteOutcome {
    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| c.status == Status::Fail)
    }
}

fn sci(x: &Real) -> String {
    format!("{:.4e}", x.to_f64())
}

fn ten_pow(exp: f64, prec: u32) -> Real {
    Float::with_val(prec, 10).pow(Float::with_val(prec, exp))
}

/// Default precision of the finite-n identities.
pub const FINITE_N_BITS: u32 = 512;
/// Precision of the central-difference check of the `a_n` equation.
pub const ODE_BITS: u32 = 1024;
pub const ODE_STEP: &str = "1e-8";
pub const GAMMA_STEP: &str = "1e-10";
pub const GAMMA_TOLERANCE: f64 = 1e-12;

/// Exact identities at each `(n, t)`.
pub fn finite_n_suite(alpha: &Decimal, ns: &[usize], ts: &[Decimal], bits: u32, pool: &rayon::ThreadPool) -> CliResult<SuiteOutcome> {
    if ts.iter().any(|t| !t.is_positive()) {
        return Err(CliError::Validation("finite-n suite needs t > 0".into()));
    }
    let bits = if bits == 0 { FINITE_N_BITS } else { bits };
    let cells: Vec<(usize, Decimal)> = ns.iter().flat_map(|&n| ts.iter().map(move |t| (n, t.clone()))).collect();
    let results: Vec<CliResult<(Vec<Check>, CellRecord)>> = pool.install(|| {
        cells.par_iter().map(|(n, t)| finite_n_cell(alpha, *n, t, bits)).collect()
    });
    let mut out = SuiteOutcome {
        suite: Suite::FiniteN.as_str().into(),
        header: "check,n,alpha,t,value,threshold,status".into(),
        rows: Vec::new(),
        checks: Vec::new(),
        fits: Vec::new(),
        cells: Vec::new(),
        cache_hits: 0,
    };
    for ((n, t), r) in cells.iter().zip(results) {
        let (checks, rec) = r?;
        for c in &checks {
            let kind = c.name.split_whitespace().next().unwrap_or_default();
            out.rows.push(format!("{kind},{n},{alpha},{t},{},{},{}", c.value, c.threshold, c.status.as_str()));
        }
        out.checks.extend(checks);
        out.cells.push(rec);
    }
    Ok(out)
}

fn finite_n_cell(alpha: &Decimal, n: usize, t: &Decimal, bits: u32) -> CliResult<(Vec<Check>, CellRecord)> {
    let start = Instant::now();
    let params = WeightParams::new(alpha.clone(), t.clone())?;
    let ctx = PrecisionCtx::with_bits(bits)?;
    let label = format!("n={n} t={t}");
    let identity_bound = ten_pow(-0.3 * bits as f64, ctx.work_bits());
    let mut checks = Vec::new();

    let sigma = sigma_form_residual(n, &params, &ctx)?;
    checks.push(Check::new(
        format!("sigma_form {label}"),
        sci(&sigma.relative),
        sci(&identity_bound),
        Status::from_bool(sigma.relative < identity_bound),
    ));

    let ode_ctx = PrecisionCtx::with_bits(bits.max(ODE_BITS))?;
    let h: Decimal = ODE_STEP.parse()?;
    match an_ode_residual(n, &params, &ode_ctx, &h) {
        Ok(full) => {
            let half = an_ode_residual(n, &params, &ode_ctx, &h.div_int(2))?;
            let r1 = full.residual.to_f64().abs();
            let r2 = half.residual.to_f64().abs();
            checks.push(Check::new(format!("an_ode {label}"), format!("{r1:.4e}"), "1e-10", Status::from_bool(r1 < 1e-10)));
            let ratio = r1 / r2;
            checks.push(Check::new(
                format!("an_ode_halving {label}"),
                format!("{ratio:.3}"),
                "[3, 5]",
                Status::from_bool((3.0..=5.0).contains(&ratio)),
            ));
        }
        Err(CoreError::Indeterminate { value }) => {
            checks.push(Check::new(format!("an_ode {label}"), format!("a_n = {value}"), "1e-10", Status::Skip));
        }
        Err(e) => return Err(e.into()),
    }

    let beta = beta_identity(n, &params, &ctx)?;
    checks.push(Check::new(
        format!("beta_identity {label}"),
        sci(&beta.relative),
        sci(&identity_bound),
        Status::from_bool(beta.relative < identity_bound),
    ));

    let gh: Decimal = GAMMA_STEP.parse()?;
    if t > &gh {
        let g = gamma_log_derivative(n, &params, &ctx, &gh)?;
        let scale = g.rhs.to_f64().abs().max(1.0);
        let err = g.absolute.to_f64();
        checks.push(Check::new(
            format!("gamma_log_derivative {label}"),
            format!("{err:.4e}"),
            format!("{:.1e}", GAMMA_TOLERANCE * scale),
            Status::from_bool(err < GAMMA_TOLERANCE * scale),
        ));
    }
    Ok((checks, CellRecord { label, bits, wall_ms: start.elapsed().as_millis() }))
}

/// Finite-n cells under the precision policy, each with its prediction.
pub fn comparison_cells(
    sol: &PIIISolution,
    grid: &[(usize, Decimal)],
    bits: u32,
    pool: &rayon::ThreadPool,
) -> CliResult<(Vec<ComparisonCell>, Vec<CellRecord>)> {
    let results: Vec<CliResult<(ComparisonCell, CellRecord)>> = pool.install(|| {
        grid.par_iter()
            .map(|(n, t)| {
                let start = Instant::now();
                let params = WeightParams::new(sol.alpha().clone(), t.clone())?;
                let cert = with_policy(
                    bits,
                    *n,
                    PrecisionCtx::DEFAULT_GUARD,
                    |ctx| FiniteCell::compute(*n, &params, ctx),
                    |c| c.fingerprint(),
                )?;
                let cell = ComparisonCell::new(cert.value, &params, sol)?;
                Ok((cell, CellRecord { label: format!("n={n} t={t}"), bits: cert.bits, wall_ms: start.elapsed().as_millis() }))
            })
            .collect()
    });
    let mut cells = Vec::new();
    let mut recs = Vec::new();
    for r in results {
        let (c, rec) = r?;
        cells.push(c);
        recs.push(rec);
    }
    Ok((cells, recs))
}

/// Slope window for fixed-s fits.
pub const FIXED_S_SLOPE: (f64, f64) = (-1.4, -0.6);
/// Allowed spread of the fixed-t bound constant as the grid extends.
pub const BOUND_SPREAD: f64 = 2.0;

pub enum Scaling {
    FixedS(Decimal),
    FixedT(Decimal),
}

pub fn asymptotics_suite(
    sol: &PIIISolution,
    ns: &[usize],
    scaling: &Scaling,
    bits: u32,
    pool: &rayon::ThreadPool,
) -> CliResult<SuiteOutcome> {
    let (regime, grid): (Regime, Vec<(usize, Decimal)>) = match scaling {
        Scaling::FixedS(s) => (Regime::FixedS, ns.iter().map(|&n| (n, s.div_int(2 * n as i64))).collect()),
        Scaling::FixedT(t) => (Regime::FixedT, ns.iter().map(|&n| (n, t.clone())).collect()),
    };
    let (cells, recs) = comparison_cells(sol, &grid, bits, pool)?;
    let mut out = SuiteOutcome {
        suite: Suite::Asymptotics.as_str().into(),
        header: ERROR_CSV_HEADER.into(),
        rows: Vec::new(),
        checks: Vec::new(),
        fits: Vec::new(),
        cells: recs,
        cache_hits: 0,
    };
    let mut reports = Vec::new();
    for q in Quantity::ALL {
        let report = ErrorReport::new(q, regime, &cells);
        out.rows.extend(report.csv_rows());
        if let Ok(fit) = report.fit() {
            out.fits.push(FitSummary {
                quantity: q.as_str().into(),
                regime: regime.as_str().into(),
                slope: fit.slope,
                intercept: fit.intercept,
                residual: fit.residual,
            });
        }
        reports.push(report);
    }
    let get = |q: Quantity| reports.iter().find(|r| r.quantity == q).expect("all quantities");
    match regime {
        Regime::FixedS => {
            if ns.len() < 4 {
                return Err(CoreError::InsufficientGrid { need: 4, got: ns.len() }.into());
            }
            for q in [Quantity::H, Quantity::A] {
                let r = get(q);
                let errs: Vec<String> = r.rows.iter().map(|x| format!("{:.4e}", x.rel_err.to_f64())).collect();
                out.checks.push(Check::new(
                    format!("monotone {q}"),
                    errs.join(" > "),
                    "strictly decreasing",
                    Status::from_bool(r.monotone_decreasing()),
                ));
                let fit = r.fit()?;
                out.checks.push(Check::new(
                    format!("order {q}"),
                    format!("{:.4} (fit residual {:.2e})", fit.slope, fit.residual),
                    format!("[{}, {}]", FIXED_S_SLOPE.0, FIXED_S_SLOPE.1),
                    Status::from_bool(fit.slope >= FIXED_S_SLOPE.0 && fit.slope <= FIXED_S_SLOPE.1),
                ));
            }
        }
        Regime::FixedT => {
            if ns.len() < 2 {
                return Err(CoreError::InsufficientGrid { need: 2, got: ns.len() }.into());
            }
            let r = get(Quantity::LnD);
            let errs: Vec<String> = r.rows.iter().map(|x| format!("{:.4e}", x.rel_err.to_f64())).collect();
            out.checks.push(Check::new(
                format!("monotone {}", Quantity::LnD),
                errs.join(" > "),
                "strictly decreasing",
                Status::from_bool(r.monotone_decreasing()),
            ));
            let constants: Vec<f64> = (2..=r.rows.len())
                .map(|k| {
                    let prefix = ErrorReport { quantity: r.quantity, regime: r.regime, rows: r.rows[..k].to_vec() };
                    prefix.bound_constant(-1.0 / 3.0)
                })
                .collect();
            let lo = constants.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = constants.iter().cloned().fold(0.0, f64::max);
            let shown: Vec<String> = constants.iter().map(|c| format!("{c:.4e}")).collect();
            out.checks.push(Check::new(
                "bound_constant ln_d (C in err <= C |integral| n^-1/3)",
                shown.join(", "),
                format!("max/min <= {BOUND_SPREAD}"),
                Status::from_bool(lo > 0.0 && hi / lo <= BOUND_SPREAD),
            ));
        }
    }
    Ok(out)
}

pub const TRANSITION_GRID: [&str; 7] = ["1e-3", "1e-2", "0.1", "1", "10", "100", "1e3"];
pub const SMALL_S_TOLERANCE: f64 = 1e-2;
pub const LARGE_S_TOLERANCE: f64 = 1e-1;
pub const TRANSITION_N: usize = 20;

pub fn transitions_suite(sol: &PIIISolution, n: usize) -> CliResult<SuiteOutcome> {
    let grid: Vec<Decimal> = TRANSITION_GRID.iter().map(|s| s.parse()).collect::<pertlag_core::Result<_>>()?;
    let rows = transition_table(n, sol, &grid)?;
    let first = rows.first().expect("grid nonempty");
    let last = rows.last().expect("grid nonempty");
    let small = |name: &str, v: f64| {
        Check::new(format!("{name} at s = {}", first.s), format!("{v:.4e}"), format!("{SMALL_S_TOLERANCE:e}"), Status::from_bool(v < SMALL_S_TOLERANCE))
    };
    let large = |name: &str, v: f64| {
        Check::new(format!("{name} at s = {}", last.s), format!("{v:.4e}"), format!("{LARGE_S_TOLERANCE:e}"), Status::from_bool(v < LARGE_S_TOLERANCE))
    };
    let checks = vec![
        small("small-s H_n = -s/(2a)", first.h_small_rel()),
        small("small-s alpha_n excess = s/(2an)", first.excess_small_rel()),
        large("large-s H_n = -(3/4) s^(2/3)", last.h_large_rel()),
        large("large-s beta_n excess = s^(2/3)/4", last.beta_large_rel()),
    ];
    Ok(SuiteOutcome {
        suite: Suite::Transitions.as_str().into(),
        header: TRANSITION_CSV_HEADER.into(),
        rows: rows.iter().map(|r| r.csv()).collect(),
        checks,
        fits: Vec::new(),
        cells: Vec::new(),
        cache_hits: 0,
    })
}

fn solution(alpha: &Decimal, s_max: Decimal, tol: &Decimal, bits: u32, dir: &Path) -> CliResult<(PIIISolution, bool)> {
    let key = SolutionKey { alpha: alpha.clone(), tol: tol.clone(), s_max, bits };
    let loaded = load_or_integrate(&key, dir)?;
    Ok((loaded.solution, loaded.cache_hit))
}

pub fn run(args: &VerifyArgs, pool: &rayon::ThreadPool) -> CliResult<()> {
    let alpha = parse_alpha(&args.alpha)?;
    let tol = parse_positive("tol", &args.tol)?;
    let cache_dir = resolve_cache_dir(args.cache_dir.as_ref());
    let ns = args.n.as_deref().map(parse_n_grid).transpose()?;
    let ts = args.t.as_deref().map(parse_t_grid).transpose()?;
    let mut cfg = RunConfig {
        command: format!("verify --suite {}", args.suite.as_str()),
        alpha: alpha.clone(),
        t: ts.clone().unwrap_or_default(),
        n: ns.clone().unwrap_or_default(),
        s_max: None,
        tol: Some(tol.clone()),
        bits: args.bits,
        out_path: args.output.out.clone(),
        format: args.output.format,
        cache_dir: Some(cache_dir.clone()),
    };
    let start = Instant::now();
    let mut outcome = match args.suite {
        Suite::FiniteN => {
            let ns = ns.ok_or_else(|| CliError::Validation("finite-n suite needs --n".into()))?;
            let ts = ts.ok_or_else(|| CliError::Validation("finite-n suite needs --t".into()))?;
            cfg.cache_dir = None;
            cfg.tol = None;
            finite_n_suite(&alpha, &ns, &ts, args.bits, pool)?
        }
        Suite::Asymptotics => {
            let ns = ns.ok_or_else(|| CliError::Validation("asymptotics suite needs --n".into()))?;
            let n_max = *ns.last().expect("nonempty grid") as i64;
            let (scaling, s_max) = match (&args.fixed_s, &args.fixed_t) {
                (Some(s), None) => {
                    let s = parse_positive("fixed-s", s)?;
                    (Scaling::FixedS(s.clone()), s)
                }
                (None, Some(t)) => {
                    let t = parse_positive("fixed-t", t)?;
                    let s_max = t.mul_int(2 * n_max);
                    (Scaling::FixedT(t), s_max)
                }
                _ => return Err(CliError::Validation("asymptotics suite needs exactly one of --fixed-s, --fixed-t".into())),
            };
            cfg.s_max = Some(s_max.clone());
            let (sol, hit) = solution(&alpha, s_max, &tol, args.bits, &cache_dir)?;
            let mut o = asymptotics_suite(&sol, &ns, &scaling, 0, pool)?;
            o.cache_hits += hit as usize;
            o
        }
        Suite::Transitions => {
            let n = ns.as_ref().and_then(|v| v.first().copied()).unwrap_or(TRANSITION_N);
            let s_max = parse_decimal("s", TRANSITION_GRID[TRANSITION_GRID.len() - 1])?;
            cfg.s_max = Some(s_max.clone());
            let (sol, hit) = solution(&alpha, s_max, &tol, args.bits, &cache_dir)?;
            let mut o = transitions_suite(&sol, n)?;
            o.cache_hits += hit as usize;
            o
        }
    };
    if outcome.cells.is_empty() {
        outcome.cells.push(CellRecord { label: "suite".into(), bits: args.bits, wall_ms: start.elapsed().as_millis() });
    }

    let mut manifest = RunManifest::new(cfg);
    manifest.cells = outcome.cells.clone();
    manifest.cache_hits = outcome.cache_hits;
    let body = render_table(&outcome.header, &outcome.rows, args.output.format)?;
    let mut summary = serde_json::to_string_pretty(&outcome)?;
    summary.push('\n');
    match &args.output.out {
        Some(path) => {
            let spath = summary_path(path);
            write_atomic(&spath, summary.as_bytes())?;
            manifest.outputs.push(spath);
            emit(Some(path), &body, &mut manifest)?;
        }
        None => emit(None, &body, &mut manifest)?,
    }
    for c in &outcome.checks {
        if args.output.out.is_some() {
            println!("{}", c.line());
        } else {
            eprintln!("{}", c.line());
        }
    }
    match outcome.first_failure() {
        Some(c) => Err(CliError::VerifyFailed(c.name.clone())),
        None => Ok(()),
    }
}
