//! Hard-instance families and the prefix-hit distinguishing game.
//!
//! Every family member agrees with a low-influence base function except on
//! points whose k-bit prefix lies in a small random set `R`, where a
//! high-influence function takes over. An algorithm that never queries a
//! point with prefix in `R` cannot tell the member from its base.

use alloc::format;

use rand::RngCore;

use crate::estimator::{derive_params, estimate_influence, EstimateReport};
use crate::lattice::{sample_uniform_point, RngStream};
use crate::numeric::{choose_exact, floor_snapped, threshold_influence};
use crate::zoo::{make_counting_oracle, FunctionKind, FunctionSpec, PrefixSet};
use crate::{Error, Result};

/// Largest supported `k` for [`find_t_k1`] (exact `u128` arithmetic).
pub const MAX_FIND_T_K: usize = 100;

/// Largest `t <= floor(k/2)` with `I[tau^t_k] <= 1`, and that influence.
pub fn find_t_k1(k: usize) -> Result<(usize, f64)> {
    if !(2..=MAX_FIND_T_K).contains(&k) {
        return Err(Error::InvalidParameter { name: "k", value: k as f64, reason: "find_t_k1 needs 2 <= k <= 100" });
    }
    // I[tau^t_k] = k C(k-1, t-1) / 2^(k-1); compare numerators exactly.
    let den = 1u128 << (k - 1);
    let mut best = 0;
    for t in 1..=k / 2 {
        let num = k as u128 * choose_exact(k as u64 - 1, t as u64 - 1).expect("k <= 100 fits u128");
        if num <= den {
            best = t;
        } else {
            break;
        }
    }
    Ok((best, threshold_influence(k as u64, best as u64)))
}

/// `I[maj'_m]`, strict majority over `m` coordinates.
pub fn strict_majority_influence(m: usize) -> f64 {
    threshold_influence(m as u64, (m / 2 + 1) as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    Monotone,
    MonotoneSinglePoint,
    General,
}

impl FamilyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FamilyKind::Monotone => "monotone",
            FamilyKind::MonotoneSinglePoint => "monotone_single_point",
            FamilyKind::General => "general",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyInstance {
    pub kind: FamilyKind,
    pub n: usize,
    pub k: usize,
    /// Base threshold for the monotone kinds.
    pub t: Option<usize>,
    pub r_size: u64,
    pub i_star: f64,
    /// `I*/I[maj'_{n-k}]` for the monotone kind, `|R|/2^k` otherwise.
    pub beta: f64,
    pub spec: FunctionSpec,
    /// The function the member coincides with off `R`.
    pub base: FunctionSpec,
}

impl FamilyInstance {
    /// Probability that one uniform query has its prefix in `R`.
    pub fn hit_probability(&self) -> f64 {
        self.r_size as f64 / libm::ldexp(1.0, self.k as i32)
    }

    /// `1 - (1 - |R|/2^k)^q`.
    pub fn expected_hit_rate(&self, q: u64) -> f64 {
        1.0 - libm::pow(1.0 - self.hit_probability(), q as f64)
    }

    /// `(1 - 2I*/n) + (I*/n)(n - k)`, the general family's influence bound.
    pub fn general_bound(&self) -> f64 {
        let (n, k, i) = (self.n as f64, self.k as f64, self.i_star);
        (1.0 - 2.0 * i / n) + (i / n) * (n - k)
    }

    /// A fresh member of the same family: same parameters, new `R`.
    pub fn resample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<FamilyInstance> {
        let r = match self.kind {
            FamilyKind::Monotone | FamilyKind::MonotoneSinglePoint => {
                PrefixSet::sample_weight_class(self.k as u32, self.t.unwrap_or(0) as u32, self.r_size, rng)?
            }
            FamilyKind::General => PrefixSet::sample_uniform(self.k as u32, self.r_size, rng)?,
        };
        let kind = match self.spec.kind() {
            FunctionKind::MonotoneLowerBound { k, t, i_star, .. } => {
                FunctionKind::MonotoneLowerBound { k: *k, t: *t, r, i_star: *i_star }
            }
            FunctionKind::GeneralLowerBound { k, .. } => FunctionKind::GeneralLowerBound { k: *k, r },
            _ => return Err(Error::InvalidSpec("family member has no prefix set".into())),
        };
        let mut out = self.clone();
        out.spec = FunctionSpec::new(self.n, kind)?;
        Ok(out)
    }
}

/// `floor(2 log2 n)`, computed exactly as `floor(log2 n^2)`.
pub fn default_monotone_k(n: usize) -> usize {
    let sq = n as u128 * n as u128;
    (127 - sq.leading_zeros()) as usize
}

fn check_i_star(i_star: f64, allow_zero: bool) -> Result<()> {
    let ok = i_star.is_finite() && (i_star > 0.0 || (allow_zero && i_star == 0.0));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "i_star", value: i_star, reason: "must be finite and positive" })
    }
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if !(2..=63).contains(&k) || k >= n {
        return Err(Error::Infeasible(format!("prefix length k={k} needs 2 <= k <= 63 and k < n={n}")));
    }
    Ok(())
}

/// A member of the monotone family: `tau^{t(k,1)}_k` patched with
/// `maj'_{n-k}` on `R`, `|R| = floor(beta 2^k)`.
pub fn build_monotone_family_member<R: RngCore + ?Sized>(
    n: usize,
    i_star: f64,
    rng: &mut R,
    k_override: Option<usize>,
) -> Result<FamilyInstance> {
    check_i_star(i_star, false)?;
    let k = k_override.unwrap_or_else(|| default_monotone_k(n));
    check_k(n, k)?;
    let (t, _) = find_t_k1(k)?;
    let maj = strict_majority_influence(n - k);
    let beta = i_star / maj;
    let size = libm::floor(beta * libm::ldexp(1.0, k as i32));
    let universe = choose_exact(k as u64, t as u64).expect("k <= 63") as u64;
    if size > universe as f64 {
        return Err(Error::Infeasible(format!(
            "required |R| = floor(beta 2^k) = {size} exceeds C({k},{t}) = {universe} (n={n}, k={k}, I*={i_star}, beta={beta:.6}, I[maj'_{}]={maj:.6})",
            n - k
        )));
    }
    if size < 1.0 {
        return Err(Error::Infeasible(format!(
            "beta 2^k = {:.4} < 1 gives an empty R (n={n}, k={k}, I*={i_star}, beta={beta:.6})",
            beta * libm::ldexp(1.0, k as i32)
        )));
    }
    let size = size as u64;
    let r = PrefixSet::sample_weight_class(k as u32, t as u32, size, rng)?;
    Ok(FamilyInstance {
        kind: FamilyKind::Monotone,
        n,
        k,
        t: Some(t),
        r_size: size,
        i_star,
        beta,
        spec: FunctionSpec::new(n, FunctionKind::MonotoneLowerBound { k, t, r, i_star })?,
        base: FunctionSpec::threshold(n, k, t)?,
    })
}

/// The single-point variant: `k = floor(log2(sqrt(n)/I*))`, base
/// `tau^{ceil(k/2)}_k`, and `R` one uniform prefix of that weight.
pub fn build_single_point_member<R: RngCore + ?Sized>(n: usize, i_star: f64, rng: &mut R) -> Result<FamilyInstance> {
    check_i_star(i_star, false)?;
    let kf = floor_snapped(libm::log2(libm::sqrt(n as f64) / i_star));
    if kf < 2.0 {
        return Err(Error::Infeasible(format!("k = floor(log2(sqrt(n)/I*)) = {kf} < 2 (n={n}, I*={i_star})")));
    }
    let k = kf as usize;
    check_k(n, k)?;
    let t = k.div_ceil(2);
    let r = PrefixSet::sample_weight_class(k as u32, t as u32, 1, rng)?;
    Ok(FamilyInstance {
        kind: FamilyKind::MonotoneSinglePoint,
        n,
        k,
        t: Some(t),
        r_size: 1,
        i_star,
        beta: libm::ldexp(1.0, -(k as i32)),
        spec: FunctionSpec::new(n, FunctionKind::MonotoneLowerBound { k, t, r, i_star })?,
        base: FunctionSpec::threshold(n, k, t)?,
    })
}

/// The general (non-monotone) family: `x_1` patched with the parity of
/// `x_{k+1..n}` on `R`, `k = log2 n`, `|R| = ceil(I*)`.
pub fn build_general_family_member<R: RngCore + ?Sized>(n: usize, i_star: f64, rng: &mut R) -> Result<FamilyInstance> {
    check_i_star(i_star, true)?;
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::Infeasible(format!("n={n} must be a power of two >= 2")));
    }
    let k = n.trailing_zeros() as usize;
    if (n as f64) < (k + 2) as f64 * i_star {
        return Err(Error::Infeasible(format!("n={n} < (k+2) I* = {} (k={k}, I*={i_star})", (k + 2) as f64 * i_star)));
    }
    let size = libm::ceil(i_star) as u64;
    let r = PrefixSet::sample_uniform(k as u32, size, rng)?;
    Ok(FamilyInstance {
        kind: FamilyKind::General,
        n,
        k,
        t: None,
        r_size: size,
        i_star,
        beta: size as f64 / libm::ldexp(1.0, k as i32),
        spec: FunctionSpec::new(n, FunctionKind::GeneralLowerBound { k, r })?,
        base: FunctionSpec::dictator(n, 1)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GameStrategy {
    /// `q` uniform queries, ignoring the answers.
    UniformQueries(u64),
    /// The influence estimator with auto-selected regime.
    Estimator { epsilon: f64, delta: f64 },
}

/// Outcome of one trial; see [`run_game_trial`].
#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub queries: u64,
    pub hit: bool,
    /// Uniform strategy: some answer differed between the arms. Estimator
    /// strategy: the two estimates differ by more than a factor 2.
    pub answers_differ: bool,
    pub member_report: Option<EstimateReport>,
    pub base_report: Option<EstimateReport>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameReport {
    pub trials: u64,
    pub queries_per_trial: f64,
    pub hit_trials: u64,
    pub hit_rate: f64,
    /// `1 - (1 - |R|/2^k)^q` for the uniform strategy.
    pub expected_hit_rate: Option<f64>,
    pub answer_diff_trials: u64,
    /// Fraction of trials whose member and base estimates differ by more
    /// than a factor 2 (estimator strategy only).
    pub advantage: Option<f64>,
}

fn differ_by_factor_two(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => a > 2.0 * b || b > 2.0 * a,
        (None, None) => false,
        _ => true,
    }
}

/// Trial `index` of the game: a fresh `R` from stream `3 index`, and, for
/// the estimator strategy, the two arms on streams `3 index + 1` and
/// `3 index + 2`.
pub fn run_game_trial(instance: &FamilyInstance, strategy: GameStrategy, seed: u64, index: u64) -> Result<TrialOutcome> {
    let mut rng = RngStream::new(seed, 3 * index);
    let member = instance.resample(&mut rng)?;
    let mut om = make_counting_oracle(&member.spec);
    let mut ob = make_counting_oracle(&member.base);
    match strategy {
        GameStrategy::UniformQueries(q) => {
            let mut differ = false;
            for _ in 0..q {
                let p = sample_uniform_point(instance.n, &mut rng);
                differ |= om.evaluate(&p)? != ob.evaluate(&p)?;
            }
            Ok(TrialOutcome { queries: q, hit: om.prefix_hits() > 0, answers_differ: differ, member_report: None, base_report: None })
        }
        GameStrategy::Estimator { epsilon, delta } => {
            let params = derive_params(instance.n as u64, epsilon, delta, 0.0)?;
            let a = estimate_influence(&mut om, &params, &mut RngStream::new(seed, 3 * index + 1))?;
            let b = estimate_influence(&mut ob, &params, &mut RngStream::new(seed, 3 * index + 2))?;
            Ok(TrialOutcome {
                queries: a.queries,
                hit: a.prefix_hits > 0,
                answers_differ: differ_by_factor_two(a.estimate, b.estimate),
                member_report: Some(a),
                base_report: Some(b),
            })
        }
    }
}

/// Folds trial outcomes, in trial order, into a report.
pub fn aggregate_game(instance: &FamilyInstance, strategy: GameStrategy, outcomes: &[TrialOutcome]) -> GameReport {
    let trials = outcomes.len() as u64;
    let hit_trials = outcomes.iter().filter(|o| o.hit).count() as u64;
    let diff = outcomes.iter().filter(|o| o.answers_differ).count() as u64;
    let queries: u64 = outcomes.iter().map(|o| o.queries).sum();
    let frac = |x: u64| if trials == 0 { 0.0 } else { x as f64 / trials as f64 };
    let (expected_hit_rate, advantage) = match strategy {
        GameStrategy::UniformQueries(q) => (Some(instance.expected_hit_rate(q)), None),
        GameStrategy::Estimator { .. } => (None, Some(frac(diff))),
    };
    GameReport {
        trials,
        queries_per_trial: frac(queries),
        hit_trials,
        hit_rate: frac(hit_trials),
        expected_hit_rate,
        answer_diff_trials: diff,
        advantage,
    }
}

pub fn run_distinguishing_game(instance: &FamilyInstance, strategy: GameStrategy, trials: u64, seed: u64) -> Result<GameReport> {
    let outcomes = (0..trials)
        .map(|i| run_game_trial(instance, strategy, seed, i))
        .collect::<Result<alloc::vec::Vec<_>>>()?;
    Ok(aggregate_game(instance, strategy, &outcomes))
}
