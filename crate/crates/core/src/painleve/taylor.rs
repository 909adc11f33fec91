//! Taylor expansion of the state about a regular point.
//!
//! The polynomial form `s^2 v v'' - s^2 v'^2 + s v v' - v^3 - a s v + s^2 = 0`
//! gives the coefficients of `v(s_c + tau)` by a convolution recurrence.
//! `r` and the integral `int (r - r(0))/x dx` ride along as extra series.

use crate::error::{Error, Result};
use crate::numkernel::Real;
use rug::ops::Pow;
use rug::Float;

/// Coefficients of `v`, `r` and the accumulated integral about `centre`.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub centre: Real,
    pub v: Vec<Real>,
    pub r: Vec<Real>,
    pub integral: Vec<Real>,
}

/// State at one node.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeState {
    pub s: Real,
    pub v: Real,
    pub vprime: Real,
    pub r: Real,
    pub integral: Real,
}

pub fn expand(node: &NodeState, alpha: &Real, r_origin: &Real, order: usize) -> Result<Expansion> {
    let prec = node.v.prec();
    let s = &node.s;
    let guard = Float::with_val(prec, 1) >> (prec / 2);
    if node.v <= guard {
        return Err(Error::DenominatorGuard { s: s.to_string_radix(10, Some(12)) });
    }
    let sq = Float::with_val(prec, s.square_ref());
    let two_s = Float::with_val(prec, s * 2u32);

    let mut a: Vec<Real> = vec![node.v.clone(), node.vprime.clone()];
    let mut vp: Vec<Real> = vec![node.vprime.clone()];
    let mut vpp: Vec<Real> = Vec::new();
    // Running coefficient arrays of V V'', V'^2, V V' and V^2.
    let mut p: Vec<Real> = Vec::new();
    let mut q: Vec<Real> = Vec::new();
    let mut rr: Vec<Real> = Vec::new();
    let mut v2: Vec<Real> = Vec::new();
    let get = |xs: &[Real], k: isize| -> Real {
        if k < 0 { Float::new(prec) } else { xs[k as usize].clone() }
    };

    for k in 0..order.saturating_sub(1) {
        let ki = k as isize;
        let mut p_star = Float::new(prec);
        for i in 1..=k {
            p_star += Float::with_val(prec, &a[i] * &vpp[k - i]);
        }
        let mut qk = Float::new(prec);
        for i in 0..=k {
            qk += Float::with_val(prec, &vp[i] * &vp[k - i]);
        }
        let mut rk = Float::new(prec);
        for i in 0..=k {
            rk += Float::with_val(prec, &a[i] * &vp[k - i]);
        }
        let mut v2k = Float::new(prec);
        for i in 0..=k {
            v2k += Float::with_val(prec, &a[i] * &a[k - i]);
        }
        v2.push(v2k);
        let mut tk = Float::new(prec);
        for i in 0..=k {
            tk += Float::with_val(prec, &v2[i] * &a[k - i]);
        }
        let mut rest = Float::with_val(prec, &sq * &p_star);
        rest += Float::with_val(prec, &two_s * &get(&p, ki - 1));
        rest += get(&p, ki - 2);
        rest -= Float::with_val(prec, &sq * &qk);
        rest -= Float::with_val(prec, &two_s * &get(&q, ki - 1));
        rest -= get(&q, ki - 2);
        rest += Float::with_val(prec, s * &rk);
        rest += get(&rr, ki - 1);
        rest -= &tk;
        let lin = Float::with_val(prec, s * &a[k]) + &get(&a, ki - 1);
        rest -= Float::with_val(prec, alpha * &lin);
        match k {
            0 => rest += &sq,
            1 => rest += &two_s,
            2 => rest += 1u32,
            _ => {}
        }
        let vpp_k = -rest / Float::with_val(prec, &sq * &a[0]);
        let pk = Float::with_val(prec, &a[0] * &vpp_k) + &p_star;
        vpp.push(vpp_k.clone());
        p.push(pk);
        q.push(qk);
        rr.push(rk);
        let next = vpp_k / ((k + 2) * (k + 1)) as u32;
        a.push(next);
        vp.push(Float::with_val(prec, &a[k + 2] * (k + 2) as u32));
    }

    // r' = V / S and integral' = (r - r(0)) / S with S = s + tau.
    let mut r = vec![node.r.clone()];
    let mut quot = Float::new(prec);
    for (k, ak) in a.iter().enumerate() {
        quot = (Float::with_val(prec, ak - &quot)) / s;
        r.push(Float::with_val(prec, &quot / (k + 1) as u32));
    }
    let mut integral = vec![node.integral.clone()];
    let mut g = Float::new(prec);
    for (k, rk) in r.iter().enumerate().take(a.len()) {
        let num = if k == 0 { Float::with_val(prec, rk - r_origin) } else { rk.clone() };
        g = Float::with_val(prec, &num - &g) / s;
        integral.push(Float::with_val(prec, &g / (k + 1) as u32));
    }
    Ok(Expansion { centre: s.clone(), v: a, r, integral })
}

fn horner(c: &[Real], tau: &Real) -> Real {
    let prec = tau.prec();
    c.iter().rev().fold(Float::new(prec), |acc, ck| acc * tau + ck)
}

fn horner_derivative(c: &[Real], tau: &Real) -> Real {
    let prec = tau.prec();
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(Float::new(prec), |acc, (k, ck)| acc * tau + Float::with_val(prec, ck * k as u32))
}

impl Expansion {
    /// State at `centre + tau`.
    pub fn eval(&self, tau: &Real) -> NodeState {
        let prec = tau.prec();
        NodeState {
            s: Float::with_val(prec, &self.centre + tau),
            v: horner(&self.v, tau),
            vprime: horner_derivative(&self.v, tau),
            r: horner(&self.r, tau),
            integral: horner(&self.integral, tau),
        }
    }

    /// Step whose last two terms of each series are below `eps` relative to
    /// the series' leading magnitude.
    pub fn step_size(&self, eps: &Real) -> Option<Real> {
        let prec = eps.prec();
        let mut best: Option<Real> = None;
        for series in [&self.v, &self.r, &self.integral] {
            let p = series.len() - 1;
            let scale = Float::with_val(prec, series[0].abs_ref()).max(&Float::with_val(prec, 1));
            let budget = Float::with_val(prec, eps * &scale);
            for k in [p - 1, p] {
                let c = Float::with_val(prec, series[k].abs_ref());
                if c.is_zero() {
                    continue;
                }
                let h = Float::with_val(prec, &budget / &c).pow(Float::with_val(prec, k as u32).recip());
                best = Some(match best {
                    Some(b) if b < h => b,
                    _ => h,
                });
            }
        }
        best
    }
}
