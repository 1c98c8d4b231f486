//! Ground truth by exhaustive enumeration (`n <= 24`), plus the closed form
//! of the walk success probability for full-support thresholds at any `n`.
//!
//! The walk success probability `p_{w,s*}(f)` has two independent exact
//! routes here: [`exact_walk_success_probability`] pushes the endpoint
//! distribution through the lattice step by step and assumes nothing about
//! `f`; [`edge_sum_walk_probability`] sums, over influential edges, the
//! probability that a walk traverses that edge, which is only valid for
//! monotone `f` (a downward path then crosses at most one influential edge).

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Div, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::lattice::{cutoff_level, CutoffLevel, Point};
use crate::numeric::binomial_half_pmf;
use crate::zoo::{FunctionSpec, OracleHandle};
use crate::{Error, Result};

pub const MAX_EXACT_N: usize = 24;
pub const MAX_DP_N: usize = 22;

/// Number type for the exact computations: `f64`, or `BigRational` when an
/// identity has to hold exactly.
pub trait Scalar: Clone + Zero + Add<Output = Self> + Mul<Output = Self> + Div<Output = Self> {
    fn ratio(num: u64, den: u64) -> Self;
    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    #[inline]
    fn ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }
    #[inline]
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// A fully tabulated function on `{0,1}^n`, `n <= 24`.
#[derive(Clone, Debug)]
pub struct Table {
    n: usize,
    bits: Vec<u64>,
}

impl Table {
    #[inline]
    pub fn get(&self, x: u64) -> bool {
        self.bits[(x / 64) as usize] >> (x % 64) & 1 == 1
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn ones(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }
}

/// Queries `o` on all `2^n` points.
pub fn tabulate(o: &mut OracleHandle<'_>, max_n: usize) -> Result<Table> {
    let n = o.dim();
    if n > max_n {
        return Err(Error::DimensionTooLarge { n, max: max_n });
    }
    let mut bits = vec![0u64; (1usize << n).div_ceil(64)];
    for x in 0..1u64 << n {
        if o.evaluate_word(x)? {
            bits[(x / 64) as usize] |= 1 << (x % 64);
        }
    }
    Ok(Table { n, bits })
}

/// Exact influence data. `I_i[f] = per_variable_flips[i] / 2^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfluenceProfile {
    pub n: usize,
    /// Number of `x` in `{0,1}^n` with `f(x) != f(x ^ e_i)`.
    pub per_variable_flips: Vec<u64>,
    /// Number of influential lattice edges, counted once per edge.
    pub edge_count: u64,
    /// `(s*, e_{s*}(f))`: influential edges with both endpoints in the band
    /// `n/2 - s* <= h <= n/2 + s*`.
    pub band: Option<(u64, u64)>,
}

impl InfluenceProfile {
    pub fn per_variable(&self, i: usize) -> f64 {
        self.per_variable_flips[i] as f64 / (1u64 << self.n) as f64
    }

    /// `sum_i I_i[f]` as numerator over `2^n`.
    pub fn total_numerator(&self) -> u64 {
        self.per_variable_flips.iter().sum()
    }

    pub fn total(&self) -> f64 {
        self.total_numerator() as f64 / (1u64 << self.n) as f64
    }

    pub fn band_edge_count(&self) -> Option<u64> {
        self.band.map(|(_, e)| e)
    }
}

#[inline]
fn in_band(n: usize, s_star: u64, h: u32) -> bool {
    let (n, h) = (n as i128, h as i128);
    let s = s_star as i128;
    n - 2 * s <= 2 * h && 2 * h <= n + 2 * s
}

pub fn exact_influence(o: &mut OracleHandle<'_>, s_star: Option<u64>) -> Result<InfluenceProfile> {
    let table = tabulate(o, MAX_EXACT_N)?;
    Ok(profile_from_table(&table, s_star))
}

pub fn profile_from_table(table: &Table, s_star: Option<u64>) -> InfluenceProfile {
    let n = table.n;
    // Per-variable influence straight from the definition, over all x.
    let per_variable_flips: Vec<u64> = (0..n)
        .map(|i| (0..1u64 << n).filter(|&x| table.get(x) != table.get(x ^ 1 << i)).count() as u64)
        .collect();

    // Edges counted once, from their lower endpoint.
    let mut edge_count = 0u64;
    let mut band_count = 0u64;
    for x in 0..1u64 << n {
        let fx = table.get(x);
        let hx = x.count_ones();
        for i in 0..n {
            if x >> i & 1 == 1 {
                continue;
            }
            let y = x | 1 << i;
            if table.get(y) != fx {
                edge_count += 1;
                if let Some(s) = s_star {
                    if in_band(n, s, hx) && in_band(n, s, hx + 1) {
                        band_count += 1;
                    }
                }
            }
        }
    }
    InfluenceProfile { n, per_variable_flips, edge_count, band: s_star.map(|s| (s, band_count)) }
}

pub fn count_influential_edges(o: &mut OracleHandle<'_>) -> Result<u64> {
    let table = tabulate(o, MAX_EXACT_N)?;
    let n = table.n;
    let mut count = 0;
    for x in 0..1u64 << n {
        let fx = table.get(x);
        for i in 0..n {
            if x >> i & 1 == 0 && table.get(x | 1 << i) != fx {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Monotonicity check; on failure returns an edge `(lower, upper)` with
/// `f(lower) = 1 > f(upper) = 0`.
pub fn is_monotone(o: &mut OracleHandle<'_>) -> Result<(bool, Option<(Point, Point)>)> {
    let table = tabulate(o, MAX_EXACT_N)?;
    Ok(match monotone_violation(&table) {
        None => (true, None),
        Some((lo, hi)) => (false, Some((Point::from_u64(table.n, lo), Point::from_u64(table.n, hi)))),
    })
}

pub fn monotone_violation(table: &Table) -> Option<(u64, u64)> {
    let n = table.n;
    for x in 0..1u64 << n {
        if !table.get(x) {
            continue;
        }
        for i in 0..n {
            let y = x | 1 << i;
            if y != x && !table.get(y) {
                return Some((x, y));
            }
        }
    }
    None
}

fn resolve_cutoff(n: usize, s_star: Option<u64>) -> CutoffLevel {
    s_star.and_then(|s| cutoff_level(n as u64, s))
}

/// `Pr[f(v) = from and f(u) = to]` for a uniform start `v` and the
/// cut-off walk endpoint `u`, by propagating the endpoint distribution.
pub fn exact_walk_transition_probability<S: Scalar>(
    o: &mut OracleHandle<'_>,
    w: u64,
    s_star: Option<u64>,
    from: bool,
    to: bool,
) -> Result<S> {
    let table = tabulate(o, MAX_DP_N)?;
    Ok(walk_transition_from_table(&table, w, s_star, from, to))
}

pub fn walk_transition_from_table<S: Scalar>(table: &Table, w: u64, s_star: Option<u64>, from: bool, to: bool) -> S {
    let n = table.n;
    let size = 1usize << n;
    let clamp = resolve_cutoff(n, s_star).unwrap_or(0);
    let start = S::ratio(1, 1u64 << n);
    let mut mass: Vec<S> = (0..size as u64).map(|x| if table.get(x) == from { start.clone() } else { S::zero() }).collect();
    for _ in 0..w {
        let mut next = vec![S::zero(); size];
        let mut moved = false;
        for (x, m) in mass.iter().enumerate() {
            if m.is_zero() {
                continue;
            }
            let h = x.count_ones() as u64;
            if h <= clamp {
                next[x] = next[x].clone() + m.clone();
                continue;
            }
            moved = true;
            let share = m.clone() / S::ratio(h, 1);
            let mut rest = x;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                rest ^= bit;
                next[x ^ bit] = next[x ^ bit].clone() + share.clone();
            }
        }
        mass = next;
        if !moved {
            break;
        }
    }
    mass.into_iter()
        .enumerate()
        .filter(|(x, _)| table.get(*x as u64) == to)
        .fold(S::zero(), |acc, (_, m)| acc + m)
}

/// `p_{w,s*}(f)`: probability that the walk starts at `f = 1` and ends at
/// `f = 0`. Valid for any `f`.
pub fn exact_walk_success_probability<S: Scalar>(o: &mut OracleHandle<'_>, w: u64, s_star: Option<u64>) -> Result<S> {
    exact_walk_transition_probability(o, w, s_star, true, false)
}

/// `Pr[f(v) != f(u)]`, the per-iteration success probability of the walk
/// estimator. Equals `p_{w,s*}` for monotone functions.
pub fn exact_walk_disagreement_probability(o: &mut OracleHandle<'_>, w: u64, s_star: Option<u64>) -> Result<f64> {
    let table = tabulate(o, MAX_DP_N)?;
    Ok(walk_transition_from_table::<f64>(&table, w, s_star, true, false)
        + walk_transition_from_table::<f64>(&table, w, s_star, false, true))
}

/// Probability that a length-`w` walk from a uniform start traverses one
/// fixed edge whose upper endpoint has weight `ell`:
/// `2^-n (1/ell) (1 + sum_{i=1}^{w-1} prod_{j=0}^{i-1} (n-ell-j)/(ell+i-j))`.
pub fn edge_traversal_probability<S: Scalar>(n: usize, ell: u64, w: u64) -> S {
    if w == 0 || ell == 0 {
        return S::zero();
    }
    let n = n as u64;
    let mut sum = S::ratio(1, 1);
    for i in 1..w {
        if ell + i > n {
            break;
        }
        let mut prod = S::ratio(1, 1);
        for j in 0..i {
            prod = prod * S::ratio(n - ell - j, ell + i - j);
        }
        sum = sum + prod;
    }
    S::ratio(1, 1u64 << n) * S::ratio(1, ell) * sum
}

/// `p_{w,s*}(f)` as a sum over influential edges; monotone `f` only.
pub fn edge_sum_walk_probability<S: Scalar>(o: &mut OracleHandle<'_>, w: u64, s_star: Option<u64>) -> Result<S> {
    let table = tabulate(o, MAX_EXACT_N)?;
    if let Some(witness) = monotone_violation(&table) {
        return Err(Error::NotMonotone { witness: Some(witness) });
    }
    Ok(edge_sum_from_table(&table, w, s_star))
}

pub fn edge_sum_from_table<S: Scalar>(table: &Table, w: u64, s_star: Option<u64>) -> S {
    let n = table.n;
    let clamp = resolve_cutoff(n, s_star).unwrap_or(0);
    // Influential edges grouped by the weight of their upper endpoint.
    let mut per_level = vec![0u64; n + 1];
    for x in 0..1u64 << n {
        if table.get(x) {
            continue;
        }
        let hx = x.count_ones() as u64;
        if hx < clamp {
            continue;
        }
        for i in 0..n {
            let y = x | 1 << i;
            if y != x && table.get(y) {
                per_level[hx as usize + 1] += 1;
            }
        }
    }
    per_level
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .fold(S::zero(), |acc, (ell, &c)| acc + S::ratio(c, 1) * edge_traversal_probability::<S>(n, ell as u64, w))
}

/// `p_{w,s*}` for the full-support threshold `tau^t_n`, any `n`.
///
/// All influential edges of `tau^t_n` join levels `t` and `t-1`, and there
/// are `C(n,t) t` of them, so the edge sum collapses to
/// `C(n,t)/2^n * (1 + sum_{i=1}^{w-1} prod_j ...)`. The binomial factor is
/// evaluated in log space for large `n`.
pub fn symmetric_exact_walk_probability(spec: &FunctionSpec, w: u64, s_star: Option<u64>) -> Result<f64> {
    let t = spec.full_threshold().ok_or_else(|| Error::InvalidSpec("expected a full-support threshold".into()))? as u64;
    let n = spec.dim() as u64;
    if w == 0 || t == 0 || t > n {
        return Ok(0.0);
    }
    let clamp = resolve_cutoff(spec.dim(), s_star).unwrap_or(0);
    if t - 1 < clamp {
        return Ok(0.0);
    }
    // prod_{j<i} (n-t-j)/(t+i-j) = [(n-t)!/(n-t-i)!] / [(t+i)!/t!], so each
    // term is the previous one times (n-t-i+1)/(t+i).
    let mut sum = 1.0;
    let mut term = 1.0;
    for i in 1..w {
        if t + i > n {
            break;
        }
        term *= (n - t - i + 1) as f64 / (t + i) as f64;
        sum += term;
    }
    Ok(binomial_half_pmf(n, t) * sum)
}

/// `e_{s*}(f) / (2^{n-1} I[f])` for the full-support threshold `tau^t_n`.
pub fn symmetric_band_edge_fraction(spec: &FunctionSpec, s_star: u64) -> Result<f64> {
    let t = spec.full_threshold().ok_or_else(|| Error::InvalidSpec("expected a full-support threshold".into()))? as u64;
    if t == 0 || t > spec.dim() as u64 {
        return Ok(0.0);
    }
    let n = spec.dim();
    let both = in_band(n, s_star, (t - 1) as u32) && in_band(n, s_star, t as u32);
    Ok(if both { 1.0 } else { 0.0 })
}

/// Both sides of `I[f] >= 4 Pr[f=1] Pr[f=0]`, exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct KklCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub edge_count: u64,
    pub ones: u64,
}

pub fn kkl_check(o: &mut OracleHandle<'_>) -> Result<KklCheck> {
    let table = tabulate(o, MAX_EXACT_N)?;
    Ok(kkl_from_table(&table))
}

pub fn kkl_from_table(table: &Table) -> KklCheck {
    let n = table.n;
    let profile = profile_from_table(table, None);
    let ones = table.ones();
    let zeros = (1u64 << n) - ones;
    let edges = profile.edge_count;
    // edges / 2^(n-1) >= 4 ones zeros / 4^n  <=>  edges * 2^n >= 2 ones zeros
    let holds = (edges as u128) << n >= 2 * ones as u128 * zeros as u128;
    let size = (1u64 << n) as f64;
    KklCheck {
        lhs: edges as f64 / (size / 2.0),
        rhs: 4.0 * ones as f64 * zeros as f64 / (size * size),
        holds,
        edge_count: edges,
        ones,
    }
}
