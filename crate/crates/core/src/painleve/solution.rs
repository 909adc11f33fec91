use super::series::{seed_series, SeriesSeed};
use super::taylor::{expand, Expansion, NodeState};
use crate::error::{Error, Result};
use crate::numkernel::{Decimal, PrecisionCtx, Real};
use rug::ops::Pow;
use rug::Float;

/// Smallest `s_max` for which the tail report is meaningful.
pub const TAIL_MIN_S: u32 = 1000;

const MAX_STEPS: usize = 1_000_000;

/// Worst-case amplification of a perturbation over `(0, s_max]`.
///
/// Linearising about `r ~ (3/2) s^{2/3}` gives modes growing like
/// `exp((3 sqrt 3 / 2) s^{1/3})`; the factor is squared for margin.
pub fn growth_factor(s_max: &Real) -> Real {
    let prec = s_max.prec();
    let cbrt = Float::with_val(prec, s_max.cbrt_ref());
    let three_root3 = Float::with_val(prec, Float::with_val(prec, 27u32).sqrt_ref());
    (three_root3 * cbrt).exp()
}

/// Everything known at one point of the trajectory.
#[derive(Clone, Debug)]
pub struct PointValue {
    pub s: Real,
    pub v: Real,
    pub vprime: Real,
    pub vsecond: Real,
    pub r: Real,
    pub rprime: Real,
    pub rsecond: Real,
    pub rthird: Real,
    /// `int_0^s (r(x) - r(0)) / x dx`.
    pub integral: Real,
}

impl PointValue {
    fn from_state(state: &NodeState, vsecond: Real) -> Self {
        let prec = state.v.prec();
        let s = &state.s;
        let s2 = Float::with_val(prec, s.square_ref());
        let rprime = Float::with_val(prec, &state.v / s);
        let rsecond = (Float::with_val(prec, &state.vprime * s) - &state.v) / &s2;
        let rthird = (Float::with_val(prec, &vsecond * &s2) - Float::with_val(prec, &state.vprime * s) * 2u32
            + Float::with_val(prec, &state.v * 2u32))
            / Float::with_val(prec, &s2 * s);
        Self {
            s: s.clone(),
            v: state.v.clone(),
            vprime: state.vprime.clone(),
            vsecond,
            r: state.r.clone(),
            rprime,
            rsecond,
            rthird,
            integral: state.integral.clone(),
        }
    }
}

/// Residuals of the three limit equations at one point.
#[derive(Clone, Debug)]
pub struct NodeResiduals {
    pub s: Real,
    /// `s^2 r''^2 - 2 s r'^3 + ((8r - 1)/4) r'^2 + 2a r' - 1`.
    pub first_integral: Real,
    /// `s^2 r' r''' - s^2 r''^2 + s r' r'' - s r'^3 - a r' + 1`.
    pub third_order: Real,
    /// `2 s^2 r' r''' - s^2 r''^2 + 2 s r' r'' - 4 s r'^3 + (2r - 1/4) r'^2 + 1`.
    pub third_order_free: Real,
}

impl NodeResiduals {
    pub fn at(p: &PointValue, alpha: &Real) -> Self {
        let prec = p.r.prec();
        let s = &p.s;
        let s2 = Float::with_val(prec, s.square_ref());
        let r1 = &p.rprime;
        let r1sq = Float::with_val(prec, r1.square_ref());
        let r1cube = Float::with_val(prec, &r1sq * r1);
        let s2r2sq = Float::with_val(prec, p.rsecond.square_ref()) * &s2;
        let s_r1cube = Float::with_val(prec, s * &r1cube);
        let s2_r1_r3 = Float::with_val(prec, &s2 * r1) * &p.rthird;
        let s_r1_r2 = Float::with_val(prec, s * r1) * &p.rsecond;
        let a_r1 = Float::with_val(prec, alpha * r1);

        let eight_r = Float::with_val(prec, &p.r * 8u32);
        let first_integral = Float::with_val(prec, &s2r2sq - Float::with_val(prec, &s_r1cube * 2u32))
            + (eight_r - 1u32) / 4u32 * &r1sq
            + Float::with_val(prec, &a_r1 * 2u32)
            - 1u32;
        let third_order = Float::with_val(prec, &s2_r1_r3 - &s2r2sq) + &s_r1_r2 - &s_r1cube - &a_r1 + 1u32;
        let two_r = Float::with_val(prec, &p.r * 2u32) - Float::with_val(prec, 0.25);
        let third_order_free = Float::with_val(prec, &s2_r1_r3 * 2u32) - &s2r2sq
            + Float::with_val(prec, &s_r1_r2 * 2u32)
            - Float::with_val(prec, &s_r1cube * 4u32)
            + two_r * &r1sq
            + 1u32;
        Self { s: s.clone(), first_integral, third_order, third_order_free }
    }
}

/// Samples of `d(s) = r - (3/2) s^{2/3} + a s^{1/3}` over the last two decades.
#[derive(Clone, Debug)]
pub struct TailReport {
    pub samples: Vec<(Real, Real)>,
    /// `max |d|` over `[s_max/10, s_max]`.
    pub top_decade_max: Real,
    /// `max |d|` over `[s_max/100, s_max/10]`.
    pub previous_decade_max: Real,
    /// `r(s_max) / s_max^{2/3}`.
    pub leading_ratio: Real,
    pub bounded: bool,
}

/// The certified trajectory on `(0, s_max]`.
#[derive(Clone, Debug)]
pub struct PIIISolution {
    alpha: Decimal,
    s_max: Decimal,
    tol: Decimal,
    prec: u32,
    eps: Real,
    order: usize,
    seed: SeriesSeed,
    nodes: Vec<NodeState>,
    steps: Vec<Expansion>,
}

/// Working parameters derived from `(s_max, tol, ctx)`.
pub(crate) struct Plan {
    pub prec: u32,
    pub eps: Real,
    pub taylor_order: usize,
    pub seed_order: u32,
}

pub(crate) fn plan(s_max: &Decimal, tol: &Decimal, ctx: &PrecisionCtx) -> Result<Plan> {
    if !s_max.is_positive() {
        return Err(Error::Domain("s_max must be > 0".into()));
    }
    if !tol.is_positive() {
        return Err(Error::Domain("tol must be > 0".into()));
    }
    let probe = 128 + ctx.guard_bits();
    let growth = growth_factor(&s_max.to_real(probe));
    let eps_probe = tol.to_real(probe) / growth / 100u32;
    let log2_inv = -Float::with_val(probe, eps_probe.log2_ref()).to_f64();
    let bits = ctx.bits().max(log2_inv.ceil() as u32 + 64);
    let prec = bits + ctx.guard_bits();
    let growth = growth_factor(&s_max.to_real(prec));
    let eps = tol.to_real(prec) / growth / 100u32;
    let ln_eps = log2_inv * std::f64::consts::LN_2;
    let taylor_order = (ln_eps / 2.0).ceil() as usize + 1;
    let seed_order = (ln_eps / 0.02f64.ln().abs()).ceil() as u32 + 3;
    Ok(Plan { prec, eps, taylor_order: taylor_order.max(8), seed_order: seed_order.max(6) })
}

/// `(working precision, seed order)` chosen for `(s_max, tol, ctx)`.
pub fn working_plan(s_max: &Decimal, tol: &Decimal, ctx: &PrecisionCtx) -> Result<(u32, u32)> {
    let p = plan(s_max, tol, ctx)?;
    Ok((p.prec, p.seed_order))
}

/// Integrate from the series handoff to `s_max` with local error `tol`
/// scaled down by the growth factor.
pub fn integrate(alpha: &Decimal, s_max: &Decimal, tol: &Decimal, ctx: &PrecisionCtx) -> Result<PIIISolution> {
    if !alpha.is_positive() {
        return Err(Error::Domain("alpha must be > 0".into()));
    }
    let plan = plan(s_max, tol, ctx)?;
    let seed = seed_series(alpha, plan.seed_order, plan.prec)?;
    integrate_from_seed(seed, s_max, tol, ctx)
}

/// Continue a given seed; `seed` must be built at the planned precision.
pub fn integrate_from_seed(seed: SeriesSeed, s_max: &Decimal, tol: &Decimal, ctx: &PrecisionCtx) -> Result<PIIISolution> {
    let plan = plan(s_max, tol, ctx)?;
    let prec = plan.prec;
    if seed.prec() != prec {
        return Err(Error::Seed(format!("seed built at {} bits, integration needs {prec}", seed.prec())));
    }
    let alpha = seed.alpha().clone();
    let end = s_max.to_real(prec);
    let handoff = seed.trust_radius(&plan.eps)?.min(&end).clone();
    let start = seed.eval(&handoff);
    let mut nodes = vec![NodeState {
        s: handoff,
        v: start.v,
        vprime: start.vprime,
        r: start.r,
        integral: start.integral,
    }];
    let a = alpha.to_real(prec);
    let r0 = seed.r_origin();
    let mut steps = Vec::new();
    loop {
        let node = nodes.last().expect("nonempty");
        if node.s >= end {
            break;
        }
        if steps.len() >= MAX_STEPS {
            return Err(Error::StepCollapse { last_s: node.s.to_string_radix(10, Some(20)) });
        }
        let exp = expand(node, &a, &r0, plan.taylor_order)?;
        let remaining = Float::with_val(prec, &end - &node.s);
        let h = exp.step_size(&plan.eps).unwrap_or_else(|| remaining.clone());
        let floor = Float::with_val(prec, &node.s >> 60);
        if h < floor {
            return Err(Error::StepCollapse { last_s: node.s.to_string_radix(10, Some(20)) });
        }
        let next_s = if h >= remaining { end.clone() } else { Float::with_val(prec, &node.s + &h) };
        let tau = Float::with_val(prec, &next_s - &node.s);
        let mut next = exp.eval(&tau);
        next.s = next_s;
        nodes.push(next);
        steps.push(exp);
    }
    Ok(PIIISolution {
        alpha,
        s_max: s_max.clone(),
        tol: tol.clone(),
        prec,
        eps: plan.eps,
        order: plan.taylor_order,
        seed,
        nodes,
        steps,
    })
}

impl PIIISolution {
    /// Rebuild from stored node positions and states, re-deriving the
    /// expansions between them.
    pub(crate) fn from_nodes(
        alpha: &Decimal,
        s_max: &Decimal,
        tol: &Decimal,
        ctx: &PrecisionCtx,
        stored: Vec<(Real, Real, Real, Real)>,
    ) -> Result<Self> {
        let plan = plan(s_max, tol, ctx)?;
        let prec = plan.prec;
        let seed = seed_series(alpha, plan.seed_order, prec)?;
        let mut iter = stored.into_iter();
        let (s0, _, _, _) = iter.next().ok_or_else(|| Error::Cache("no nodes".into()))?;
        let start = seed.eval(&s0);
        let mut nodes = vec![NodeState { s: s0, v: start.v, vprime: start.vprime, r: start.r, integral: start.integral }];
        let a = alpha.to_real(prec);
        let r0 = seed.r_origin();
        let mut steps = Vec::new();
        for (s, v, vprime, r) in iter {
            let node = nodes.last().expect("nonempty");
            let exp = expand(node, &a, &r0, plan.taylor_order)?;
            let tau = Float::with_val(prec, &s - &node.s);
            let mut next = exp.eval(&tau);
            next.s = s;
            if next.v != v || next.vprime != vprime || next.r != r {
                return Err(Error::Cache(format!(
                    "stored state at s = {} disagrees with the recomputed trajectory",
                    next.s.to_f64()
                )));
            }
            nodes.push(next);
            steps.push(exp);
        }
        if nodes.last().map(|n| n.s != s_max.to_real(prec)).unwrap_or(true) {
            return Err(Error::Cache("last node is not at s_max".into()));
        }
        Ok(Self {
            alpha: alpha.clone(),
            s_max: s_max.clone(),
            tol: tol.clone(),
            prec,
            eps: plan.eps,
            order: plan.taylor_order,
            seed,
            nodes,
            steps,
        })
    }

    pub fn alpha(&self) -> &Decimal {
        &self.alpha
    }

    pub fn s_max(&self) -> &Decimal {
        &self.s_max
    }

    pub fn tol(&self) -> &Decimal {
        &self.tol
    }

    /// Internal working precision in bits.
    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Local error target per step.
    pub fn step_tolerance(&self) -> &Real {
        &self.eps
    }

    pub fn taylor_order(&self) -> usize {
        self.order
    }

    pub fn seed(&self) -> &SeriesSeed {
        &self.seed
    }

    pub fn handoff(&self) -> &Real {
        &self.nodes[0].s
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    fn alpha_real(&self) -> Real {
        self.alpha.to_real(self.prec)
    }

    /// Dense evaluation anywhere in `(0, s_max]`.
    pub fn eval(&self, s: &Real) -> Result<PointValue> {
        let prec = self.prec;
        let s = Float::with_val(prec, s);
        let end = self.s_max.to_real(prec);
        if s <= 0 || s > end {
            return Err(Error::OutOfRange { s: s.to_string_radix(10, Some(12)), s_max: self.s_max.to_string() });
        }
        if s <= *self.handoff() {
            let p = self.seed.eval(&s);
            let state = NodeState { s, v: p.v, vprime: p.vprime, r: p.r, integral: p.integral };
            return Ok(PointValue::from_state(&state, p.vsecond));
        }
        let idx = self.nodes.partition_point(|n| n.s < s).saturating_sub(1).min(self.steps.len() - 1);
        let exp = &self.steps[idx];
        let tau = Float::with_val(prec, &s - &exp.centre);
        let mut state = exp.eval(&tau);
        state.s = s;
        Ok(self.point_from_state(&state))
    }

    pub fn eval_decimal(&self, s: &Decimal) -> Result<PointValue> {
        self.eval(&s.to_real(self.prec))
    }

    fn point_from_state(&self, state: &NodeState) -> PointValue {
        let vsecond = super::rhs(&state.s, &state.v, &state.vprime, &self.alpha_real());
        PointValue::from_state(state, vsecond)
    }

    /// Node values with derivatives filled in.
    pub fn node_points(&self) -> Vec<PointValue> {
        self.nodes.iter().map(|n| self.point_from_state(n)).collect()
    }

    pub fn node_residuals(&self) -> Vec<NodeResiduals> {
        let a = self.alpha_real();
        self.node_points().iter().map(|p| NodeResiduals::at(p, &a)).collect()
    }

    /// `max |first integral|` over the nodes.
    pub fn first_integral_residual(&self) -> Real {
        self.max_over_nodes(|r| &r.first_integral)
    }

    /// `(max |third_order_free|, max |third_order|)` over the nodes.
    pub fn third_order_residual(&self) -> (Real, Real) {
        (self.max_over_nodes(|r| &r.third_order_free), self.max_over_nodes(|r| &r.third_order))
    }

    fn max_over_nodes(&self, pick: impl Fn(&NodeResiduals) -> &Real) -> Real {
        self.node_residuals()
            .iter()
            .fold(Float::new(self.prec), |m, r| m.max(&Float::with_val(self.prec, pick(r).abs_ref())))
    }

    /// `(r, r')` at a point so close to the origin that the series tail
    /// is below the working precision.
    pub fn origin_limits(&self) -> (Real, Real) {
        let prec = self.prec;
        let a = self.alpha.to_f64().min(1.0);
        let shift = (prec as f64 / a).ceil() as u32 + 8;
        let s = Float::with_val(prec, 1) >> shift;
        let p = self.seed.eval(&s);
        (p.r, p.rprime)
    }

    pub fn tail_check(&self) -> Result<TailReport> {
        let prec = self.prec;
        let end = self.s_max.to_real(prec);
        if end < TAIL_MIN_S {
            return Err(Error::Domain(format!("tail check needs s_max >= {TAIL_MIN_S}")));
        }
        let a = self.alpha_real();
        let per_decade = 20u32;
        let step = Float::with_val(prec, 10).pow(Float::with_val(prec, per_decade).recip());
        let mut s = Float::with_val(prec, &end / 100u32);
        let mut samples = Vec::new();
        let mut top = Float::new(prec);
        let mut prev = Float::new(prec);
        for i in 0..=2 * per_decade {
            if i == 2 * per_decade {
                s = end.clone();
            }
            let p = self.eval(&s)?;
            let c = Float::with_val(prec, s.cbrt_ref());
            let d = Float::with_val(prec, &p.r - Float::with_val(prec, c.square_ref()) * 1.5f64)
                + Float::with_val(prec, &a * &c);
            let mag = Float::with_val(prec, d.abs_ref());
            if i >= per_decade {
                top = top.max(&mag);
            }
            if i <= per_decade {
                prev = prev.max(&mag);
            }
            samples.push((s.clone(), d));
            s *= &step;
        }
        let p = self.eval(&end)?;
        let leading_ratio = p.r / Float::with_val(prec, end.cbrt_ref()).square();
        let bounded = top <= Float::with_val(prec, &prev * 2u32);
        Ok(TailReport { samples, top_decade_max: top, previous_decade_max: prev, leading_ratio, bounded })
    }
}
