use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Per-cell bookkeeping for the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct CellRecord {
    pub label: String,
    pub bits: u32,
    pub wall_ms: u128,
}

/// Sidecar describing how an output file was produced. It records wall
/// times and is therefore not itself covered by the determinism guarantee.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    pub cells: Vec<CellRecord>,
    pub cache_hits: usize,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(config: RunConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config,
            cells: Vec::new(),
            cache_hits: 0,
            outputs: Vec::new(),
        }
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    sidecar(out, "manifest.json")
}

pub fn summary_path(out: &Path) -> PathBuf {
    sidecar(out, "summary.json")
}

fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".");
    name.push(suffix);
    PathBuf::from(name)
}

/// Write through a temporary file and rename, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    f.write_all(contents).map_err(|e| CliError::io(&tmp, e))?;
    f.sync_all().map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

/// Primary output to a file (plus manifest) or to stdout.
pub fn emit(out: Option<&Path>, body: &str, manifest: &mut RunManifest) -> CliResult<()> {
    match out {
        Some(path) => {
            write_atomic(path, body.as_bytes())?;
            manifest.outputs.push(path.to_path_buf());
            let text = serde_json::to_string_pretty(manifest)?;
            write_atomic(&manifest_path(path), text.as_bytes())
        }
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

/// Render rows of equal length as CSV or as a JSON array of objects.
pub fn render_table(header: &str, rows: &[String], format: crate::config::Format) -> CliResult<String> {
    match format {
        crate::config::Format::Csv => {
            let mut s = String::with_capacity(64 * (rows.len() + 1));
            s.push_str(header);
            s.push('\n');
            for r in rows {
                s.push_str(r);
                s.push('\n');
            }
            Ok(s)
        }
        crate::config::Format::Json => {
            let keys: Vec<&str> = header.split(',').collect();
            let objects: Vec<serde_json::Map<String, serde_json::Value>> = rows
                .iter()
                .map(|r| {
                    keys.iter()
                        .zip(r.split(','))
                        .map(|(k, v)| (k.to_string(), serde_json::Value::String(v.to_string())))
                        .collect()
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&objects)?;
            s.push('\n');
            Ok(s)
        }
    }
}
