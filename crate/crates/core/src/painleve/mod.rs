//! The Painleve III transcendent `v(s) = s r'(s)` solving
//! `v'' = v'^2/v - v'/s + v^2/s^2 + a/s - 1/v` with `r(0) = (1 - 4a^2)/8`,
//! `r'(0) = 1/a` and `r ~ (3/2) s^{2/3}` at infinity.
//!
//! The trajectory starts from a log-power series near the origin and is
//! continued by high-order Taylor steps, carrying `r` and
//! `int_0^s (r - r(0))/x dx` along exactly.

mod cache;
mod series;
mod solution;
mod taylor;

pub use cache::{CachedNode, CachedSeed, CachedTerm, SolutionCache};
pub use series::{connection_constant, seed_series, seed_with_connection, SeedPoint, SeedTerm, SeriesSeed};
pub use solution::{
    growth_factor, integrate, integrate_from_seed, NodeResiduals, PIIISolution, PointValue, TailReport, TAIL_MIN_S,
    working_plan,
};
pub use taylor::NodeState;

use crate::numkernel::Real;
use rug::Float;

/// Right-hand side of the equation for `v''`.
pub(crate) fn rhs(s: &Real, v: &Real, vprime: &Real, alpha: &Real) -> Real {
    let prec = v.prec();
    Float::with_val(prec, vprime.square_ref()) / v - Float::with_val(prec, vprime / s)
        + Float::with_val(prec, v.square_ref()) / Float::with_val(prec, s.square_ref())
        + Float::with_val(prec, alpha / s)
        - Float::with_val(prec, v.recip_ref())
}

#[cfg(test)]
mod tests;
