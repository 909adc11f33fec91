use crate::error::{Error, Result};
use crate::numkernel::{gamma, PrecisionCtx, Real};
use crate::weightmoments::{MomentTable, WeightParams, JMIN};
use rug::Float;

/// Extra mantissa per matrix row: Hankel moment matrices lose a roughly
/// fixed number of bits per added row.
pub const HEADROOM_PER_ROW: u32 = 12;

/// Factored Hankel moment matrix `M_jk = mu_{j+k}`, `0 <= j, k < size`.
#[derive(Clone, Debug)]
pub struct HankelSystem {
    size: usize,
    params: WeightParams,
    ctx: PrecisionCtx,
    prec: u32,
    moments: MomentTable,
    /// `mu_{-1}, mu_{-2}, mu_{-3}` at `t = 0`, where the integrals converge.
    classical_low: [Option<Real>; 3],
    /// Unit lower factor, row-major.
    l: Vec<Real>,
    /// Pivots `h_0 .. h_{size-1}`.
    d: Vec<Real>,
}

/// Build and factor the `size x size` Hankel matrix.
pub fn build_system(size: usize, params: &WeightParams, ctx: &PrecisionCtx) -> Result<HankelSystem> {
    if size == 0 {
        return Err(Error::Domain("Hankel system needs size >= 1".into()));
    }
    let prec = ctx.work_bits() + HEADROOM_PER_ROW * size as u32;
    let inner = PrecisionCtx::new(prec - ctx.guard_bits(), ctx.guard_bits())?;
    let jmax = 2 * size as i64 - 2;
    let (moments, classical_low) = if params.is_classical() {
        let table = MomentTable::build(params, 0, jmax.max(0), &inner)?;
        let alpha = params.alpha().to_real(prec);
        let mut low: [Option<Real>; 3] = [None, None, None];
        for (i, slot) in low.iter_mut().enumerate() {
            let arg = Float::with_val(prec, &alpha - i as u32);
            if arg > 0 {
                *slot = Some(gamma(&arg, &inner)?);
            }
        }
        (table, low)
    } else {
        (MomentTable::build(params, JMIN, jmax, &inner)?, [None, None, None])
    };

    let mut sys = HankelSystem {
        size,
        params: params.clone(),
        ctx: *ctx,
        prec,
        moments,
        classical_low,
        l: vec![Float::new(prec); size * size],
        d: Vec::with_capacity(size),
    };
    sys.factor()?;
    Ok(sys)
}

impl HankelSystem {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn params(&self) -> &WeightParams {
        &self.params
    }

    pub fn ctx(&self) -> &PrecisionCtx {
        &self.ctx
    }

    /// Internal mantissa length.
    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn moments(&self) -> &MomentTable {
        &self.moments
    }

    /// `mu_j`, including the finite negative moments at `t = 0`.
    pub fn mu(&self, j: i64) -> Result<&Real> {
        if j < 0 && self.params.is_classical() {
            let idx = (-j - 1) as usize;
            return self
                .classical_low
                .get(idx)
                .and_then(|m| m.as_ref())
                .ok_or_else(|| Error::Domain(format!("mu_{j} diverges at t = 0 for this alpha")));
        }
        self.moments.get(j)
    }

    /// Pivot `h_k`.
    pub fn pivot(&self, k: usize) -> &Real {
        &self.d[k]
    }

    pub fn pivots(&self) -> &[Real] {
        &self.d
    }

    /// Factor entry `L_jk` (unit diagonal, zero above).
    pub fn lower(&self, j: usize, k: usize) -> &Real {
        &self.l[j * self.size + k]
    }

    fn factor(&mut self) -> Result<()> {
        let n = self.size;
        let prec = self.prec;
        // w[j][k] = L_jk d_k for k < j, kept to save one product per term.
        let mut ld = vec![Float::new(prec); n * n];
        for j in 0..n {
            let mut dj = self.moments.get(2 * j as i64)?.clone();
            for k in 0..j {
                dj -= Float::with_val(prec, &self.l[j * n + k] * &ld[j * n + k]);
            }
            if dj <= 0 {
                return Err(Error::PivotLoss { row: j, bits: self.ctx.bits() });
            }
            self.l[j * n + j] = Float::with_val(prec, 1);
            for i in j + 1..n {
                let mut acc = self.moments.get((i + j) as i64)?.clone();
                for k in 0..j {
                    acc -= Float::with_val(prec, &self.l[i * n + k] * &ld[j * n + k]);
                }
                ld[i * n + j] = acc.clone();
                self.l[i * n + j] = acc / &dj;
            }
            self.d.push(dj);
        }
        Ok(())
    }

    /// Solve `M_m X = B` for the leading `m x m` block, `B` given by columns
    /// in row-major `m x m` layout.
    pub(crate) fn solve_block(&self, m: usize, b: &[Real]) -> Vec<Real> {
        let n = self.size;
        let prec = self.prec;
        let mut x: Vec<Real> = b.iter().map(|v| Float::with_val(prec, v)).collect();
        for col in 0..m {
            for i in 0..m {
                let mut acc = x[i * m + col].clone();
                for k in 0..i {
                    acc -= Float::with_val(prec, &self.l[i * n + k] * &x[k * m + col]);
                }
                x[i * m + col] = acc;
            }
            for i in 0..m {
                x[i * m + col] /= &self.d[i];
            }
            for i in (0..m).rev() {
                let mut acc = x[i * m + col].clone();
                for k in i + 1..m {
                    acc -= Float::with_val(prec, &self.l[k * n + i] * &x[k * m + col]);
                }
                x[i * m + col] = acc;
            }
        }
        x
    }

    /// Coefficients `c_0..c_k` (with `c_k = 1`) of the monic orthogonal
    /// polynomial of degree `k`: row `k` of the inverse factor.
    pub fn monic_coefficients(&self, k: usize) -> Vec<Real> {
        let n = self.size;
        let prec = self.prec;
        let mut c = vec![Float::new(prec); k + 1];
        c[k] = Float::with_val(prec, 1);
        for j in (0..k).rev() {
            let mut acc = Float::new(prec);
            for (i, ci) in c.iter().enumerate().skip(j + 1) {
                acc -= Float::with_val(prec, &self.l[i * n + j] * ci);
            }
            c[j] = acc;
        }
        c
    }
}

/// Determinant of a dense matrix by Gaussian elimination with partial
/// pivoting; an independent route used to cross-check the factorization.
pub fn dense_determinant(mut a: Vec<Real>, n: usize) -> Real {
    let prec = a.first().map_or(64, |v| v.prec());
    let mut det = Float::with_val(prec, 1);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| {
                Float::with_val(prec, a[p * n + col].abs_ref())
                    .partial_cmp(&Float::with_val(prec, a[q * n + col].abs_ref()))
                    .expect("finite entries")
            })
            .expect("non-empty range");
        if a[pivot * n + col].is_zero() {
            return Float::new(prec);
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col].clone();
        det *= &p;
        for r in col + 1..n {
            let factor = Float::with_val(prec, &a[r * n + col] / &p);
            for k in col..n {
                let sub = Float::with_val(prec, &factor * &a[col * n + k]);
                a[r * n + k] -= sub;
            }
        }
    }
    det
}
