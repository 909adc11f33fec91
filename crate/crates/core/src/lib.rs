//! Arbitrary-precision numerics for the Laguerre weight `x^a e^{-x-t/x}`:
//! moments, Hankel determinants and recurrence coefficients, the Painleve III
//! transcendent that governs their double-scaling limit, and the comparison of
//! the two.

pub mod asymptotics;
pub mod error;
pub mod numkernel;
pub mod orthopoly;
pub mod painleve;
pub mod weightmoments;

pub use error::{Error, Result};
pub use numkernel::{Decimal, PrecisionCtx, Real};
pub use orthopoly::{FiniteCell, HankelSystem, LogDetData, OrthoData};
pub use painleve::{PIIISolution, SeriesSeed};
pub use weightmoments::{MomentTable, WeightParams};
