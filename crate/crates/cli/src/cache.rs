use crate::error::{CliError, CliResult};
use crate::output::write_atomic;
use pertlag_core::painleve::{integrate, SolutionCache};
use pertlag_core::{Decimal, PIIISolution, PrecisionCtx};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Identity of a cached solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionKey {
    pub alpha: Decimal,
    pub tol: Decimal,
    pub s_max: Decimal,
    pub bits: u32,
}

impl SolutionKey {
    /// Hash of the canonical decimal forms, so `1e-25` and `0.1e-24` share
    /// an entry.
    pub fn digest(&self) -> String {
        let text = format!("alpha={};tol={};s_max={};bits={}", self.alpha, self.tol, self.s_max, self.bits);
        let hash = Sha256::digest(text.as_bytes());
        hash.iter().take(16).map(|b| format!("{b:02x}")).collect()
    }

    pub fn path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("piii-{}.json", self.digest()))
    }
}

/// A solution and whether it came from disk.
pub struct Loaded {
    pub solution: PIIISolution,
    pub cache_hit: bool,
}

/// Reuse a valid cache entry or integrate and store a new one. Corrupt or
/// mismatched entries are recomputed and overwritten.
pub fn load_or_integrate(key: &SolutionKey, dir: &Path) -> CliResult<Loaded> {
    let path = key.path(dir);
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(doc) = serde_json::from_str::<SolutionCache>(&text) {
            let matches =
                doc.alpha == key.alpha && doc.tol == key.tol && doc.s_max == key.s_max && doc.bits == key.bits;
            if matches {
                if let Ok(solution) = doc.restore(PrecisionCtx::DEFAULT_GUARD) {
                    return Ok(Loaded { solution, cache_hit: true });
                }
            }
        }
    }
    let ctx = PrecisionCtx::new(key.bits.max(PrecisionCtx::MIN_BITS), PrecisionCtx::DEFAULT_GUARD)?;
    let solution = integrate(&key.alpha, &key.s_max, &key.tol, &ctx)?;
    let doc = SolutionCache::from_solution(&solution, key.bits);
    let text = serde_json::to_string(&doc)?;
    write_atomic(&path, text.as_bytes()).map_err(|e| match e {
        CliError::Io { path, source } => CliError::Io { path: format!("cache {path}"), source },
        other => other,
    })?;
    Ok(Loaded { solution, cache_hit: false })
}
