//! Parameter derivation and the two sequential estimators.
//!
//! Both estimators repeat a two-query trial until `t` trials have succeeded
//! and report `t/m` scaled to an influence estimate. The walk estimator's
//! trial is "uniform start, walk `w` steps down, compare endpoints"; the
//! direct one compares the endpoints of a uniform lattice edge.

use rand::{Rng, RngCore};

use crate::lattice::{
    cutoff_level, sample_uniform_point, walk_down_in_place, walk_down_weight, CutoffLevel, RngStream,
    UniformWeightSampler,
};
use crate::numeric::{ceil_snapped, floor_snapped};
use crate::zoo::OracleHandle;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Walk,
    Direct,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Walk => "walk",
            Regime::Direct => "direct",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    /// `m` hit `m_cap` before `t` successes: the influence is likely below
    /// the assumed floor `n^-c`.
    FloorExceeded,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::FloorExceeded => "floor_exceeded",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorParams {
    pub n: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub eps_tilde: f64,
    pub w: u64,
    pub s_star: u64,
    pub cutoff: CutoffLevel,
    pub t: u64,
    pub regime: Regime,
    pub c: f64,
    pub m_cap: u64,
}

fn check_open_unit(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value: v, reason: "must lie in (0, 1)" })
    }
}

/// `ln(8n/eps)`-based lower limit on `eps` above which walks beat edges.
pub fn walk_regime_threshold(n: u64, epsilon: f64) -> f64 {
    let nf = n as f64;
    8.0 * libm::sqrt(2.0 * libm::log(8.0 * nf / epsilon)) / libm::sqrt(nf)
}

pub fn derive_params(n: u64, epsilon: f64, delta: f64, c: f64) -> Result<EstimatorParams> {
    check_open_unit("epsilon", epsilon)?;
    check_open_unit("delta", delta)?;
    if n < 2 {
        return Err(Error::InvalidParameter { name: "n", value: n as f64, reason: "must be at least 2" });
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter { name: "c", value: c, reason: "must be finite and non-negative" });
    }
    let nf = n as f64;
    let eps_tilde = epsilon / 4.0;
    // ln(2n / (eps_tilde n^-c))
    let log_term = libm::log(2.0 * nf / eps_tilde) + c * libm::log(nf);
    let w = floor_snapped(eps_tilde * libm::sqrt(nf) / (16.0 * libm::sqrt(2.0 * log_term))) as u64;
    let s_star = ceil_snapped(0.5 * libm::sqrt(2.0 * nf * log_term)) as u64;
    let t = (ceil_snapped(96.0 * libm::log(2.0 / delta) / (epsilon * epsilon)) as u64).max(1);
    let regime = if w >= 1 && epsilon > walk_regime_threshold(n, epsilon) { Regime::Walk } else { Regime::Direct };
    let mut params = EstimatorParams {
        n,
        epsilon,
        delta,
        eps_tilde,
        w,
        s_star,
        cutoff: cutoff_level(n, s_star),
        t,
        regime,
        c,
        m_cap: 0,
    };
    params.m_cap = params.default_m_cap();
    Ok(params)
}

impl EstimatorParams {
    /// `100 t n^{1+c}`, divided by `w` in the walk regime.
    pub fn default_m_cap(&self) -> u64 {
        let base = 100.0 * self.t as f64 * libm::pow(self.n as f64, 1.0 + self.c);
        let cap = match self.regime {
            Regime::Walk => base / self.w.max(1) as f64,
            Regime::Direct => base,
        };
        // `as` saturates at u64::MAX.
        libm::ceil(cap) as u64
    }

    /// The same parameters with the regime forced to `Direct`.
    pub fn forced_direct(&self) -> EstimatorParams {
        let mut p = self.clone();
        p.regime = Regime::Direct;
        p.m_cap = p.default_m_cap();
        p
    }

    pub fn with_m_cap(mut self, m_cap: u64) -> Self {
        self.m_cap = m_cap;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    /// `None` when the run stopped at `m_cap`.
    pub estimate: Option<f64>,
    pub m: u64,
    pub successes: u64,
    pub queries: u64,
    pub prefix_hits: u64,
    pub regime: Regime,
    pub params: EstimatorParams,
    pub seed: u64,
    pub stream: u64,
    pub status: RunStatus,
}

/// One walk trial: uniform start, walk down, compare. Returns whether the
/// endpoints disagree.
pub fn walk_trial<R: RngCore + ?Sized>(
    o: &mut OracleHandle<'_>,
    w: u64,
    cutoff: CutoffLevel,
    sampler: Option<&UniformWeightSampler>,
    rng: &mut R,
) -> Result<bool> {
    match sampler {
        Some(s) if o.is_symmetric() => {
            let h = s.sample(rng);
            let fv = o.evaluate_at_weight(h)?;
            let fu = o.evaluate_at_weight(walk_down_weight(h, w, cutoff))?;
            Ok(fv != fu)
        }
        _ => {
            let mut v = sample_uniform_point(o.dim(), rng);
            let fv = o.evaluate(&v)?;
            walk_down_in_place(&mut v, w, cutoff, rng);
            let fu = o.evaluate(&v)?;
            Ok(fv != fu)
        }
    }
}

/// One direct trial: uniform point and uniform coordinate, compare `f` at
/// both ends of that edge.
pub fn edge_trial<R: RngCore + ?Sized>(
    o: &mut OracleHandle<'_>,
    sampler: Option<&UniformWeightSampler>,
    rng: &mut R,
) -> Result<bool> {
    let n = o.dim();
    match sampler {
        Some(s) if o.is_symmetric() => {
            let h = s.sample(rng);
            // The flipped coordinate is a 1 with probability h/n.
            let i = rng.random_range(0..n as u64);
            let h2 = if i < h { h - 1 } else { h + 1 };
            let fx = o.evaluate_at_weight(h)?;
            let fy = o.evaluate_at_weight(h2)?;
            Ok(fx != fy)
        }
        _ => {
            let mut x = sample_uniform_point(n, rng);
            let i = rng.random_range(0..n);
            let fx = o.evaluate(&x)?;
            x.flip(i);
            let fy = o.evaluate(&x)?;
            Ok(fx != fy)
        }
    }
}

fn check_dim(o: &OracleHandle<'_>, params: &EstimatorParams) -> Result<()> {
    if o.dim() as u64 != params.n {
        return Err(Error::DimensionMismatch { expected: params.n as usize, found: o.dim() });
    }
    Ok(())
}

fn run<F>(o: &mut OracleHandle<'_>, params: &EstimatorParams, regime: Regime, rng: &mut RngStream, mut trial: F) -> Result<EstimateReport>
where
    F: FnMut(&mut OracleHandle<'_>, &mut RngStream) -> Result<bool>,
{
    let queries0 = o.query_count();
    let hits0 = o.prefix_hits();
    let (mut m, mut alpha) = (0u64, 0u64);
    let mut status = RunStatus::Ok;
    while alpha < params.t {
        if m >= params.m_cap {
            status = RunStatus::FloorExceeded;
            break;
        }
        m += 1;
        alpha += trial(o, rng)? as u64;
    }
    let n = params.n as f64;
    let estimate = match (status, regime) {
        (RunStatus::FloorExceeded, _) => None,
        (RunStatus::Ok, Regime::Walk) => Some(n * params.t as f64 / (params.w as f64 * m as f64)),
        (RunStatus::Ok, Regime::Direct) => Some(n * params.t as f64 / m as f64),
    };
    Ok(EstimateReport {
        estimate,
        m,
        successes: alpha,
        queries: o.query_count() - queries0,
        prefix_hits: o.prefix_hits() - hits0,
        regime,
        params: params.clone(),
        seed: rng.seed(),
        stream: rng.stream(),
        status,
    })
}

/// The walk estimator. Symmetric oracles are simulated on weights only.
pub fn estimate_influence_walk(o: &mut OracleHandle<'_>, params: &EstimatorParams, rng: &mut RngStream) -> Result<EstimateReport> {
    check_dim(o, params)?;
    if params.regime != Regime::Walk || params.w == 0 {
        return Err(Error::RegimeMismatch);
    }
    let sampler = o.is_symmetric().then(|| UniformWeightSampler::new(params.n));
    let (w, cutoff) = (params.w, params.cutoff);
    run(o, params, Regime::Walk, rng, |o, rng| walk_trial(o, w, cutoff, sampler.as_ref(), rng))
}

/// The direct edge-sampling estimator; valid for any function.
pub fn estimate_influence_direct(o: &mut OracleHandle<'_>, params: &EstimatorParams, rng: &mut RngStream) -> Result<EstimateReport> {
    check_dim(o, params)?;
    let sampler = o.is_symmetric().then(|| UniformWeightSampler::new(params.n));
    run(o, params, Regime::Direct, rng, |o, rng| edge_trial(o, sampler.as_ref(), rng))
}

/// Dispatches on `params.regime`.
pub fn estimate_influence(o: &mut OracleHandle<'_>, params: &EstimatorParams, rng: &mut RngStream) -> Result<EstimateReport> {
    match params.regime {
        Regime::Walk => estimate_influence_walk(o, params, rng),
        Regime::Direct => estimate_influence_direct(o, params, rng),
    }
}
