use super::hankel::HankelSystem;
use crate::error::{Error, Result};
use crate::numkernel::Real;
use rug::Float;

/// Per-degree quantities read off one factored Hankel system of size `N`.
#[derive(Clone, Debug)]
pub struct OrthoData {
    /// `ln D_1 .. ln D_N`.
    pub ln_d: Vec<Real>,
    /// Squared norms `h_0 .. h_{N-1}`.
    pub h: Vec<Real>,
    /// Orthonormal leading coefficients `h_k^{-1/2}`.
    pub gamma: Vec<Real>,
    /// `alpha_0 .. alpha_{N-2}`.
    pub alpha_rec: Vec<Real>,
    /// `beta_1 .. beta_{N-1}` (index 0 holds `beta_1`).
    pub beta_rec: Vec<Real>,
    /// `a_k = alpha_k - (2k + 1 + alpha)`, same indexing as `alpha_rec`.
    pub a: Vec<Real>,
}

pub fn ortho_data(sys: &HankelSystem) -> OrthoData {
    let n = sys.size();
    let prec = sys.prec();
    let alpha = sys.params().alpha().to_real(prec);
    let h: Vec<Real> = sys.pivots().to_vec();
    let mut ln_d = Vec::with_capacity(n);
    let mut acc = Float::new(prec);
    for hk in &h {
        acc += Float::with_val(prec, hk.ln_ref());
        ln_d.push(acc.clone());
    }
    let gamma = h.iter().map(|hk| Float::with_val(prec, hk.recip_sqrt_ref())).collect();
    let beta_rec = (1..n).map(|k| Float::with_val(prec, &h[k] / &h[k - 1])).collect();
    let mut alpha_rec = Vec::new();
    let mut a = Vec::new();
    for k in 0..n.saturating_sub(1) {
        let mut ak = sys.lower(k + 1, k).clone();
        if k > 0 {
            ak -= sys.lower(k, k - 1);
        }
        let shift = Float::with_val(prec, &alpha + (2 * k + 1) as u32);
        a.push(Float::with_val(prec, &ak - &shift));
        alpha_rec.push(ak);
    }
    OrthoData { ln_d, h, gamma, alpha_rec, beta_rec, a }
}

/// `ln D_n` and its first three t-derivatives, with `H_n = t d/dt ln D_n`.
#[derive(Clone, Debug)]
pub struct LogDetData {
    pub n: usize,
    pub ln_d: Real,
    pub l1: Real,
    /// Absent at `t = 0` when `mu_{-2}` diverges.
    pub l2: Option<Real>,
    /// Absent at `t = 0` when `mu_{-3}` diverges.
    pub l3: Option<Real>,
    pub h: Real,
    pub h_prime: Option<Real>,
    pub h_double_prime: Option<Real>,
}

/// Derivatives of `ln D_n` for the leading `n x n` block by exact trace
/// algebra on `A = M^{-1} M'`, where `M^{(m)}_jk = (-1)^m mu_{j+k-m}`.
pub fn logdet_data(sys: &HankelSystem, n: usize) -> Result<LogDetData> {
    if n == 0 || n > sys.size() {
        return Err(Error::Domain(format!("block size {n} outside 1..={}", sys.size())));
    }
    let prec = sys.prec();
    let t = sys.params().t().to_real(prec);
    let ln_d = sys.pivots()[..n]
        .iter()
        .fold(Float::new(prec), |acc, hk| acc + Float::with_val(prec, hk.ln_ref()));

    let derivative = |m: i64| -> Result<Option<Vec<Real>>> {
        let mut out = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                let mu = match sys.mu((j + k) as i64 - m) {
                    Ok(v) => v,
                    Err(Error::Domain(_)) if sys.params().is_classical() => return Ok(None),
                    Err(e) => return Err(e),
                };
                out.push(if m % 2 == 1 { Float::with_val(prec, -mu) } else { mu.clone() });
            }
        }
        Ok(Some(sys.solve_block(n, &out)))
    };

    let a = derivative(1)?.expect("mu_{-1} is finite for alpha > 0");
    let l1 = trace(&a, n);
    let b = derivative(2)?;
    let c = derivative(3)?;
    let a2 = b.as_ref().map(|_| matmul(&a, &a, n));
    let l2 = b.as_ref().map(|b| trace(b, n) - trace_product(&a, &a, n));
    let l3 = match (&b, &c, &a2) {
        (Some(b), Some(c), Some(a2)) => {
            Some(trace(c, n) - trace_product(b, &a, n) * 3u32 + trace_product(a2, &a, n) * 2u32)
        }
        _ => None,
    };
    let h = Float::with_val(prec, &t * &l1);
    let h_prime = if sys.params().is_classical() {
        Some(l1.clone())
    } else {
        l2.as_ref().map(|l2| Float::with_val(prec, &t * l2) + &l1)
    };
    let h_double_prime = if sys.params().is_classical() {
        l2.as_ref().map(|l2| Float::with_val(prec, l2 * 2u32))
    } else {
        match (&l2, &l3) {
            (Some(l2), Some(l3)) => Some(Float::with_val(prec, &t * l3) + Float::with_val(prec, l2 * 2u32)),
            _ => None,
        }
    };
    Ok(LogDetData { n, ln_d, l1, l2, l3, h, h_prime, h_double_prime })
}

fn trace(a: &[Real], n: usize) -> Real {
    let prec = a[0].prec();
    (0..n).fold(Float::new(prec), |acc, i| acc + &a[i * n + i])
}

/// `tr(XY)`.
fn trace_product(x: &[Real], y: &[Real], n: usize) -> Real {
    let prec = x[0].prec();
    let mut acc = Float::new(prec);
    for i in 0..n {
        for j in 0..n {
            acc += Float::with_val(prec, &x[i * n + j] * &y[j * n + i]);
        }
    }
    acc
}

fn matmul(x: &[Real], y: &[Real], n: usize) -> Vec<Real> {
    let prec = x[0].prec();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = Float::new(prec);
            for k in 0..n {
                acc += Float::with_val(prec, &x[i * n + k] * &y[k * n + j]);
            }
            out.push(acc);
        }
    }
    out
}

/// `t gamma_n^2 sum_jk c_j c_k mu_{j+k-1}`, an independent route to `a_n`
/// through the monic coefficients `c` of the degree-`n` polynomial.
pub fn a_n_integral_check(sys: &HankelSystem, n: usize) -> Result<Real> {
    if n + 1 > sys.size() {
        return Err(Error::Domain(format!("degree {n} needs a system of size {}", n + 1)));
    }
    let prec = sys.prec();
    if sys.params().is_classical() {
        return Ok(Float::new(prec));
    }
    let c = sys.monic_coefficients(n);
    let mut acc = Float::new(prec);
    for (j, cj) in c.iter().enumerate() {
        let mut row = Float::new(prec);
        for (k, ck) in c.iter().enumerate() {
            row += Float::with_val(prec, ck * sys.mu((j + k) as i64 - 1)?);
        }
        acc += Float::with_val(prec, cj * &row);
    }
    let t = sys.params().t().to_real(prec);
    Ok(acc * t / sys.pivot(n))
}
