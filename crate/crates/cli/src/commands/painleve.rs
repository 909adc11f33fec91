use crate::cache::{load_or_integrate, SolutionKey};
use crate::config::{parse_alpha, parse_positive, resolve_cache_dir, PainleveArgs, RunConfig};
use crate::error::CliResult;
use crate::output::{emit, render_table, CellRecord, RunManifest};
use pertlag_core::numkernel::to_decimal;
use pertlag_core::painleve::{NodeResiduals, TAIL_MIN_S};
use pertlag_core::PIIISolution;
use std::time::Instant;

pub const CSV_HEADER: &str =
    "s,v,vprime,r,rprime,rsecond,rthird,integral,first_integral,third_order,third_order_free";

/// Node table; the first row is the `s -> 0+` limit of `r` and `r'`.
pub fn node_rows(sol: &PIIISolution) -> Vec<String> {
    let (r0, rp0) = sol.origin_limits();
    let mut rows = vec![format!("0,,,{},{},,,0,,,", to_decimal(&r0), to_decimal(&rp0))];
    let a = sol.alpha().to_real(sol.prec());
    for p in sol.node_points() {
        let res = NodeResiduals::at(&p, &a);
        rows.push(format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            to_decimal(&p.s),
            to_decimal(&p.v),
            to_decimal(&p.vprime),
            to_decimal(&p.r),
            to_decimal(&p.rprime),
            to_decimal(&p.rsecond),
            to_decimal(&p.rthird),
            to_decimal(&p.integral),
            to_decimal(&res.first_integral),
            to_decimal(&res.third_order),
            to_decimal(&res.third_order_free)
        ));
    }
    rows
}

/// Human-readable certification lines.
pub fn summary_lines(sol: &PIIISolution) -> CliResult<Vec<String>> {
    let (r0, rp0) = sol.origin_limits();
    let fi = sol.first_integral_residual();
    let (free, reduced) = sol.third_order_residual();
    let mut lines = vec![
        format!("alpha = {}  s_max = {}  tol = {}", sol.alpha(), sol.s_max(), sol.tol()),
        format!("working bits = {}  nodes = {}  handoff s0 = {:.6e}", sol.prec(), sol.nodes().len(), sol.handoff().to_f64()),
        format!("r(0+) = {}", r0.to_string_radix(10, Some(20))),
        format!("r'(0+) = {}", rp0.to_string_radix(10, Some(20))),
        format!("first integral max |residual| = {:.3e}", fi.to_f64()),
        format!("third order max |residual| = {:.3e} (free form), {:.3e} (reduced form)", free.to_f64(), reduced.to_f64()),
    ];
    if *sol.s_max() >= pertlag_core::Decimal::from_int(TAIL_MIN_S as i64) {
        let tail = sol.tail_check()?;
        lines.push(format!(
            "tail_check {}: max|d| top decade {:.4e}, previous decade {:.4e}, r/s^(2/3) at s_max {:.6}",
            if tail.bounded { "PASS" } else { "FAIL" },
            tail.top_decade_max.to_f64(),
            tail.previous_decade_max.to_f64(),
            tail.leading_ratio.to_f64()
        ));
    } else {
        lines.push(format!("tail_check SKIP: s_max below {TAIL_MIN_S}"));
    }
    Ok(lines)
}

pub fn run(args: &PainleveArgs) -> CliResult<()> {
    let alpha = parse_alpha(&args.alpha)?;
    let s_max = parse_positive("s-max", &args.s_max)?;
    let tol = parse_positive("tol", &args.tol)?;
    let cache_dir = resolve_cache_dir(args.cache_dir.as_ref());
    let cfg = RunConfig {
        command: "painleve".into(),
        alpha: alpha.clone(),
        t: Vec::new(),
        n: Vec::new(),
        s_max: Some(s_max.clone()),
        tol: Some(tol.clone()),
        bits: args.bits,
        out_path: args.output.out.clone(),
        format: args.output.format,
        cache_dir: Some(cache_dir.clone()),
    };
    let mut manifest = RunManifest::new(cfg);
    let start = Instant::now();
    let key = SolutionKey { alpha, tol, s_max, bits: args.bits };
    let loaded = load_or_integrate(&key, &cache_dir)?;
    let sol = loaded.solution;
    manifest.cache_hits += loaded.cache_hit as usize;
    manifest.cells.push(CellRecord { label: "trajectory".into(), bits: sol.prec(), wall_ms: start.elapsed().as_millis() });

    let body = render_table(CSV_HEADER, &node_rows(&sol), args.output.format)?;
    match &args.output.out {
        Some(path) => {
            emit(Some(path), &body, &mut manifest)?;
            for line in summary_lines(&sol)? {
                println!("{line}");
            }
            println!("cache {}", if loaded.cache_hit { "hit" } else { "miss" });
        }
        None => {
            emit(None, &body, &mut manifest)?;
            for line in summary_lines(&sol)? {
                eprintln!("{line}");
            }
        }
    }
    Ok(())
}
