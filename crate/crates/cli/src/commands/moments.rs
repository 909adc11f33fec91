use crate::config::{parse_alpha, parse_decimal, Format, MomentsArgs, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{emit, RunManifest};
use pertlag_core::numkernel::{quad_semiinf, rel_diff, to_decimal};
use pertlag_core::weightmoments::{weight_eval, MomentTableJson};
use pertlag_core::{MomentTable, PrecisionCtx, WeightParams};
use rug::ops::Pow;
use rug::Float;
use serde::Serialize;

const DEFAULT_BITS: u32 = 256;

#[derive(Debug, Serialize)]
struct MomentsOutput {
    #[serde(flatten)]
    table: MomentTableJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_rel_diff: Option<Vec<String>>,
}

pub fn run(args: &MomentsArgs) -> CliResult<()> {
    let alpha = parse_alpha(&args.alpha)?;
    let t = parse_decimal("t", &args.t)?;
    if t.is_negative() {
        return Err(CliError::Validation("t must be >= 0".into()));
    }
    if args.jmax < args.jmin {
        return Err(CliError::Validation("jmax must be >= jmin".into()));
    }
    let bits = if args.bits == 0 { DEFAULT_BITS } else { args.bits };
    let config = RunConfig {
        command: "moments".into(),
        alpha: alpha.clone(),
        t: vec![t.clone()],
        n: Vec::new(),
        s_max: None,
        tol: None,
        bits: args.bits,
        out_path: args.out.clone(),
        format: Format::Json,
        cache_dir: None,
    };
    let mut manifest = RunManifest::new(config);
    let params = WeightParams::new(alpha, t)?;
    let ctx = PrecisionCtx::with_bits(bits)?;
    let started = std::time::Instant::now();
    let table = MomentTable::build(&params, args.jmin, args.jmax, &ctx)?;

    let (oracle, oracle_rel_diff) = if args.oracle {
        let prec = ctx.work_bits();
        let mut values = Vec::new();
        let mut diffs = Vec::new();
        for (i, j) in (args.jmin..=args.jmax).enumerate() {
            let f = |x: &Float| {
                let w = weight_eval(x, &params).unwrap_or_else(|_| Float::new(prec));
                w * Float::with_val(prec, x.pow(j as i32))
            };
            // Stop relative to the moment's size; an absolute 2^-bits never
            // converges for large j.
            let tol = Float::with_val(prec, table.values()[i].abs_ref()) >> (bits / 2);
            let q = quad_semiinf(f, &tol, &ctx)?;
            diffs.push(to_decimal(&Float::with_val(64, rel_diff(&q.value, &table.values()[i]))));
            values.push(to_decimal(&q.value));
        }
        (Some(values), Some(diffs))
    } else {
        (None, None)
    };
    manifest.cells.push(crate::output::CellRecord {
        label: format!("j={}..{}", args.jmin, args.jmax),
        bits,
        wall_ms: started.elapsed().as_millis(),
    });
    let doc = MomentsOutput { table: table.to_json(), oracle, oracle_rel_diff };
    let mut body = serde_json::to_string_pretty(&doc)?;
    body.push('\n');
    emit(args.out.as_deref(), &body, &mut manifest)
}
