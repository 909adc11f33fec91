use super::solution::PIIISolution;
use crate::error::{Error, Result};
use crate::numkernel::{parse_real, rel_diff, to_decimal, Decimal, PrecisionCtx};
use rug::Float;
use serde::{Deserialize, Serialize};

/// On-disk form of a solution; all numbers are decimal strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionCache {
    pub alpha: Decimal,
    /// Requested precision (0 for automatic).
    pub bits: u32,
    pub tol: Decimal,
    pub s_max: Decimal,
    pub nodes: Vec<CachedNode>,
    pub seed: CachedSeed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CachedNode {
    pub s: String,
    pub v: String,
    pub vprime: String,
    pub r: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CachedSeed {
    #[serde(rename = "K")]
    pub k: u32,
    pub coeffs: Vec<CachedTerm>,
}

/// Coefficient of `s^exponent (ln s)^i` in `w = v/s - 1/a` for `i` in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CachedTerm {
    pub j: u32,
    pub k: u32,
    pub exponent: String,
    pub log_coeffs: Vec<String>,
}

impl SolutionCache {
    pub fn from_solution(sol: &PIIISolution, requested_bits: u32) -> Self {
        let nodes = sol
            .nodes()
            .iter()
            .map(|n| CachedNode {
                s: to_decimal(&n.s),
                v: to_decimal(&n.v),
                vprime: to_decimal(&n.vprime),
                r: to_decimal(&n.r),
            })
            .collect();
        let coeffs = sol
            .seed()
            .terms()
            .iter()
            .map(|t| CachedTerm {
                j: t.j,
                k: t.k,
                exponent: to_decimal(&t.exponent),
                log_coeffs: t.log_coeffs.iter().map(to_decimal).collect(),
            })
            .collect();
        Self {
            alpha: sol.alpha().clone(),
            bits: requested_bits,
            tol: sol.tol().clone(),
            s_max: sol.s_max().clone(),
            nodes,
            seed: CachedSeed { k: sol.seed().order(), coeffs },
        }
    }

    /// Rebuild the solution; the recomputed trajectory must reproduce the
    /// stored nodes exactly.
    pub fn restore(&self, guard_bits: u32) -> Result<PIIISolution> {
        let ctx = PrecisionCtx::new(self.bits.max(PrecisionCtx::MIN_BITS), guard_bits)?;
        let prec = super::solution::plan(&self.s_max, &self.tol, &ctx)?.prec;
        let stored = self
            .nodes
            .iter()
            .map(|n| {
                Ok((
                    parse_real(&n.s, prec)?,
                    parse_real(&n.v, prec)?,
                    parse_real(&n.vprime, prec)?,
                    parse_real(&n.r, prec)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let sol = PIIISolution::from_nodes(&self.alpha, &self.s_max, &self.tol, &ctx, stored)?;
        if sol.seed().order() != self.seed.k || sol.seed().terms().len() != self.seed.coeffs.len() {
            return Err(Error::Cache("seed layout differs from the stored one".into()));
        }
        let tol = Float::with_val(prec, 1) >> (prec - 8);
        for (term, stored) in sol.seed().terms().iter().zip(&self.seed.coeffs) {
            for (c, text) in term.log_coeffs.iter().zip(&stored.log_coeffs) {
                let want = parse_real(text, prec)?;
                if rel_diff(c, &want) > tol {
                    return Err(Error::Cache(format!("seed coefficient ({}, {}) differs", stored.j, stored.k)));
                }
            }
        }
        Ok(sol)
    }
}
