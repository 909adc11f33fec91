//! Hankel determinants, orthogonal-polynomial recurrence data and the
//! logarithmic derivatives of the determinant.

mod data;
mod hankel;
mod identities;
mod policy;

pub use data::{a_n_integral_check, logdet_data, ortho_data, LogDetData, OrthoData};
pub use hankel::{build_system, dense_determinant, HankelSystem, HEADROOM_PER_ROW};
pub use identities::{
    a_n_value, an_ode_residual, beta_identity, gamma_log_derivative, sigma_form_residual, IdentityCheck,
    OdeCheck, SigmaCheck,
};
pub use policy::{policy_bits, with_policy, Certified, MAX_DOUBLINGS};

use crate::error::Result;
use crate::numkernel::{PrecisionCtx, Real};
use crate::weightmoments::WeightParams;

/// Everything reported for one `(n, t)` cell.
#[derive(Clone, Debug)]
pub struct FiniteCell {
    pub n: usize,
    pub ln_d: Real,
    pub h: Real,
    pub h_prime: Option<Real>,
    pub h_double_prime: Option<Real>,
    pub alpha_n: Real,
    pub beta_n: Real,
    pub a_n: Real,
    pub gamma_n: Real,
}

impl FiniteCell {
    /// Factor a system of size `n + 2` so `alpha_n` is available.
    pub fn compute(n: usize, params: &WeightParams, ctx: &PrecisionCtx) -> Result<Self> {
        let sys = build_system(n + 2, params, ctx)?;
        Self::from_system(&sys, n)
    }

    /// Read the cell for degree `n` from a system of size at least `n + 2`.
    pub fn from_system(sys: &HankelSystem, n: usize) -> Result<Self> {
        let data = ortho_data(sys);
        let (ln_d, h, h_prime, h_double_prime) = if n == 0 {
            let zero = Real::new(sys.prec());
            (zero.clone(), zero.clone(), Some(zero.clone()), Some(zero))
        } else {
            let ld = logdet_data(sys, n)?;
            (ld.ln_d, ld.h, ld.h_prime, ld.h_double_prime)
        };
        Ok(Self {
            n,
            ln_d,
            h,
            h_prime,
            h_double_prime,
            alpha_n: data.alpha_rec[n].clone(),
            beta_n: if n == 0 { Real::new(sys.prec()) } else { data.beta_rec[n - 1].clone() },
            a_n: data.a[n].clone(),
            gamma_n: data.gamma[n].clone(),
        })
    }

    /// Values compared across precisions by the acceptance rule.
    pub fn fingerprint(&self) -> Vec<&Real> {
        let mut v = vec![&self.ln_d, &self.h, &self.alpha_n, &self.beta_n, &self.a_n, &self.gamma_n];
        if let Some(hp) = &self.h_prime {
            v.push(hp);
        }
        v
    }
}
