use crate::config::{parse_alpha, parse_n_grid, parse_t_grid, GridArgs, RunConfig};
use crate::error::CliResult;
use crate::output::{emit, render_table, CellRecord, RunManifest};
use pertlag_core::numkernel::to_decimal;
use pertlag_core::orthopoly::{build_system, with_policy, FiniteCell};
use pertlag_core::{Decimal, PrecisionCtx, Real, WeightParams};
use rayon::prelude::*;
use rug::Float;
use std::time::Instant;

pub const CSV_HEADER: &str = "n,alpha,t,bits,lnD_n,H_n,H_n_prime,alpha_n,beta_n,a_n,gamma_n";

fn config(command: &str, args: &GridArgs) -> CliResult<(RunConfig, Vec<Decimal>, Vec<usize>)> {
    let alpha = parse_alpha(&args.alpha)?;
    let t = parse_t_grid(&args.t)?;
    let n = parse_n_grid(&args.n)?;
    let cfg = RunConfig {
        command: command.into(),
        alpha,
        t: t.clone(),
        n: n.clone(),
        s_max: None,
        tol: None,
        bits: args.bits,
        out_path: args.output.out.clone(),
        format: args.output.format,
        cache_dir: None,
    };
    Ok((cfg, t, n))
}

fn opt(x: &Option<Real>) -> String {
    x.as_ref().map(to_decimal).unwrap_or_default()
}

fn row(cell: &FiniteCell, params: &WeightParams, bits: u32, extra: Option<&Real>) -> String {
    let mut s = format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        cell.n,
        params.alpha(),
        params.t(),
        bits,
        to_decimal(&cell.ln_d),
        to_decimal(&cell.h),
        opt(&cell.h_prime),
        to_decimal(&cell.alpha_n),
        if cell.n == 0 { String::new() } else { to_decimal(&cell.beta_n) },
        to_decimal(&cell.a_n),
        to_decimal(&cell.gamma_n)
    );
    if let Some(x) = extra {
        s.push(',');
        s.push_str(&to_decimal(x));
    }
    s
}

/// One `(n, t)` cell under the precision policy, with `D_n` appended.
pub fn run_det(args: &GridArgs, pool: &rayon::ThreadPool) -> CliResult<()> {
    let (cfg, ts, ns) = config("det", args)?;
    let cells: Vec<(Decimal, usize)> = ts.iter().flat_map(|t| ns.iter().map(move |&n| (t.clone(), n))).collect();
    let alpha = cfg.alpha.clone();
    let results: Vec<CliResult<(String, CellRecord)>> = pool.install(|| {
        cells
            .par_iter()
            .map(|(t, n)| {
                let start = Instant::now();
                let params = WeightParams::new(alpha.clone(), t.clone())?;
                let cert = with_policy(
                    args.bits,
                    *n,
                    PrecisionCtx::DEFAULT_GUARD,
                    |ctx| FiniteCell::compute(*n, &params, ctx),
                    |c| c.fingerprint(),
                )?;
                let d = Float::with_val(cert.value.ln_d.prec(), cert.value.ln_d.exp_ref());
                let line = row(&cert.value, &params, cert.bits, Some(&d));
                let rec = CellRecord { label: format!("n={n},t={t}"), bits: cert.bits, wall_ms: start.elapsed().as_millis() };
                Ok((line, rec))
            })
            .collect()
    });
    finish(cfg, results, &format!("{CSV_HEADER},D_n"))
}

/// Rows for degrees `0..n` from a single factorisation per `(n, t)`.
pub fn run_coeffs(args: &GridArgs, pool: &rayon::ThreadPool) -> CliResult<()> {
    let (cfg, ts, ns) = config("coeffs", args)?;
    let cells: Vec<(Decimal, usize)> = ts.iter().flat_map(|t| ns.iter().map(move |&n| (t.clone(), n))).collect();
    let alpha = cfg.alpha.clone();
    let results: Vec<CliResult<(String, CellRecord)>> = pool.install(|| {
        cells
            .par_iter()
            .map(|(t, n)| {
                let start = Instant::now();
                let params = WeightParams::new(alpha.clone(), t.clone())?;
                let cert = with_policy(
                    args.bits,
                    *n,
                    PrecisionCtx::DEFAULT_GUARD,
                    |ctx| {
                        let sys = build_system(*n + 1, &params, ctx)?;
                        (0..*n).map(|k| FiniteCell::from_system(&sys, k)).collect::<pertlag_core::Result<Vec<_>>>()
                    },
                    |cells| cells.iter().flat_map(|c| c.fingerprint()).collect(),
                )?;
                let lines: Vec<String> = cert.value.iter().map(|c| row(c, &params, cert.bits, None)).collect();
                let rec = CellRecord { label: format!("n={n},t={t}"), bits: cert.bits, wall_ms: start.elapsed().as_millis() };
                Ok((lines.join("\n"), rec))
            })
            .collect()
    });
    finish(cfg, results, CSV_HEADER)
}

fn finish(cfg: RunConfig, results: Vec<CliResult<(String, CellRecord)>>, header: &str) -> CliResult<()> {
    let format = cfg.format;
    let out = cfg.out_path.clone();
    let mut manifest = RunManifest::new(cfg);
    let mut rows = Vec::new();
    for r in results {
        let (line, rec) = r?;
        rows.extend(line.lines().map(str::to_string));
        manifest.cells.push(rec);
    }
    let body = render_table(header, &rows, format)?;
    emit(out.as_deref(), &body, &mut manifest)
}
