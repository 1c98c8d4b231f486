//! Boolean-function specifications and the query-counting oracle.
//!
//! Coordinates are 1-based in specs (`Dictator { i: 1 }` is `x_1`), and
//! k-bit prefixes are integers with `x_1` at bit 0.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, RngCore};

use crate::lattice::Point;
use crate::numeric::{choose_exact, threshold_influence};
use crate::{Error, Result};

/// Explicit prefix sets above this size switch to the predicate form.
pub const EXPLICIT_PREFIX_LIMIT: u64 = 1 << 22;

/// A set `R` of k-bit prefixes.
#[derive(Clone, Debug, PartialEq)]
pub enum PrefixSet {
    /// Sorted, duplicate-free prefixes.
    Explicit(Vec<u64>),
    /// Seeded pseudo-random membership: a candidate prefix (one of the
    /// right weight, when `weight` is set) is a member with probability
    /// `density`, independently per prefix.
    Predicate { seed: u64, density: f64, weight: Option<u32> },
}

impl PrefixSet {
    pub fn empty() -> Self {
        PrefixSet::Explicit(Vec::new())
    }

    /// Builds an explicit set, sorting and deduplicating.
    pub fn from_prefixes(mut prefixes: Vec<u64>) -> Self {
        prefixes.sort_unstable();
        prefixes.dedup();
        PrefixSet::Explicit(prefixes)
    }

    #[inline]
    pub fn contains(&self, prefix: u64) -> bool {
        match self {
            PrefixSet::Explicit(v) => v.binary_search(&prefix).is_ok(),
            PrefixSet::Predicate { seed, density, weight } => {
                if let Some(t) = weight {
                    if prefix.count_ones() != *t {
                        return false;
                    }
                }
                membership_hash(*seed, prefix) < density_threshold(*density)
            }
        }
    }

    /// Exact size for explicit sets.
    pub fn explicit_len(&self) -> Option<usize> {
        match self {
            PrefixSet::Explicit(v) => Some(v.len()),
            PrefixSet::Predicate { .. } => None,
        }
    }

    /// Exact size for explicit sets, `density * universe` for predicates.
    pub fn expected_len(&self, universe: f64) -> f64 {
        match self {
            PrefixSet::Explicit(v) => v.len() as f64,
            PrefixSet::Predicate { density, .. } => density * universe,
        }
    }

    /// Uniform `size`-subset of `L^t_k` (k-bit words of weight `t`).
    pub fn sample_weight_class<R: RngCore + ?Sized>(k: u32, t: u32, size: u64, rng: &mut R) -> Result<Self> {
        if k == 0 || k > 63 || t > k {
            return Err(Error::InvalidSpec(format!("weight class L^{t}_{k} unsupported")));
        }
        let universe = choose_exact(k as u64, t as u64).expect("k <= 63 fits u128") as u64;
        if size > universe {
            return Err(Error::Infeasible(format!(
                "|R| = {size} exceeds |L^{t}_{k}| = C({k},{t}) = {universe}"
            )));
        }
        if size > EXPLICIT_PREFIX_LIMIT {
            return Ok(PrefixSet::Predicate {
                seed: rng.next_u64(),
                density: size as f64 / universe as f64,
                weight: Some(t),
            });
        }
        if universe <= 1 << 25 {
            // Selection sampling over the colex enumeration keeps the output
            // sorted and takes exactly `size` elements.
            let mut out = Vec::with_capacity(size as usize);
            let mut needed = size;
            let mut remaining = universe;
            let mut word = if t == 0 { 0 } else { (1u64 << t) - 1 };
            while needed > 0 {
                if rng.random_range(0..remaining) < needed {
                    out.push(word);
                    needed -= 1;
                }
                remaining -= 1;
                if remaining > 0 {
                    word = next_same_weight(word);
                }
            }
            Ok(PrefixSet::Explicit(out))
        } else {
            let ranks = floyd_sample(universe, size, rng);
            let mut out: Vec<u64> = ranks.into_iter().map(|r| unrank_combination(k, t, r)).collect();
            out.sort_unstable();
            Ok(PrefixSet::Explicit(out))
        }
    }

    /// Uniform `size`-subset of `{0,1}^k`.
    pub fn sample_uniform<R: RngCore + ?Sized>(k: u32, size: u64, rng: &mut R) -> Result<Self> {
        if k > 63 {
            return Err(Error::InvalidSpec(format!("prefix length k={k} unsupported")));
        }
        let universe = 1u64 << k;
        if size > universe {
            return Err(Error::Infeasible(format!("|R| = {size} exceeds 2^{k}")));
        }
        if size > EXPLICIT_PREFIX_LIMIT {
            return Ok(PrefixSet::Predicate { seed: rng.next_u64(), density: size as f64 / universe as f64, weight: None });
        }
        Ok(PrefixSet::Explicit(floyd_sample(universe, size, rng).into_iter().collect()))
    }
}

// Next larger integer with the same popcount (Gosper).
#[inline]
fn next_same_weight(x: u64) -> u64 {
    let c = x & x.wrapping_neg();
    let r = x + c;
    (((r ^ x) >> 2) / c) | r
}

// Robert Floyd's sampling of `size` distinct values in `0..universe`.
fn floyd_sample<R: RngCore + ?Sized>(universe: u64, size: u64, rng: &mut R) -> BTreeSet<u64> {
    let mut chosen = BTreeSet::new();
    for j in universe - size..universe {
        let r = rng.random_range(0..=j);
        if !chosen.insert(r) {
            chosen.insert(j);
        }
    }
    chosen
}

// The `rank`-th k-bit word of weight t in colex order.
fn unrank_combination(k: u32, t: u32, mut rank: u64) -> u64 {
    let mut word = 0u64;
    let mut left = t as u64;
    for i in (0..k as u64).rev() {
        if left == 0 {
            break;
        }
        let c = choose_exact(i, left).unwrap() as u64;
        if c <= rank {
            word |= 1 << i;
            rank -= c;
            left -= 1;
        }
    }
    word
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn membership_hash(seed: u64, prefix: u64) -> u64 {
    splitmix64(seed ^ splitmix64(prefix))
}

#[inline]
fn density_threshold(density: f64) -> u64 {
    if density >= 1.0 {
        u64::MAX
    } else if density <= 0.0 {
        0
    } else {
        (density * 18_446_744_073_709_551_616.0) as u64
    }
}

/// The function families the harness knows how to evaluate.
#[derive(Clone, Debug, PartialEq)]
pub enum FunctionKind {
    Constant(bool),
    /// `x_i`.
    Dictator { i: usize },
    /// `tau^t_k`: 1 iff `x_1 + ... + x_k >= t`.
    Threshold { k: usize, t: usize },
    /// `x_a xor ... xor x_b`, inclusive.
    Parity { a: usize, b: usize },
    /// Prefix in `R`: strict majority of `x_{k+1..n}`; otherwise `tau^t_k`.
    MonotoneLowerBound { k: usize, t: usize, r: PrefixSet, i_star: f64 },
    /// Prefix in `R`: parity of `x_{k+1..n}`; otherwise `x_1`.
    GeneralLowerBound { k: usize, r: PrefixSet },
    /// Explicit values indexed by the integer encoding of the point.
    TruthTable { table: Vec<u64> },
}

/// A function over `{0,1}^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionSpec {
    n: usize,
    kind: FunctionKind,
}

pub const MAX_TRUTH_TABLE_N: usize = 24;

impl FunctionSpec {
    pub fn new(n: usize, kind: FunctionKind) -> Result<Self> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidSpec(msg));
        if n == 0 {
            return bad("n must be at least 1".into());
        }
        match &kind {
            FunctionKind::Constant(_) => {}
            FunctionKind::Dictator { i } => {
                if *i == 0 || *i > n {
                    return bad(format!("dictator coordinate {i} outside 1..={n}"));
                }
            }
            FunctionKind::Threshold { k, t } => {
                if t > k || *k > n {
                    return bad(format!("threshold needs 0 <= t <= k <= n, got t={t} k={k} n={n}"));
                }
            }
            FunctionKind::Parity { a, b } => {
                if *a == 0 || a > b || *b > n {
                    return bad(format!("parity range {a}..={b} invalid for n={n}"));
                }
            }
            FunctionKind::MonotoneLowerBound { k, t, r, .. } => {
                if *k == 0 || *k > 63 || *k >= n || t > k {
                    return bad(format!("monotone lower-bound needs 1 <= k <= 63, k < n, t <= k (k={k}, t={t}, n={n})"));
                }
                match r {
                    PrefixSet::Explicit(v) => {
                        if !v.windows(2).all(|w| w[0] < w[1]) {
                            return bad("R must be sorted and duplicate-free".into());
                        }
                        if let Some(p) = v.iter().find(|p| **p >> k != 0 || p.count_ones() as usize != *t) {
                            return bad(format!("prefix {p:#x} is not a {k}-bit word of weight {t}"));
                        }
                    }
                    PrefixSet::Predicate { weight, .. } => {
                        if *weight != Some(*t as u32) {
                            return bad("predicate R must be restricted to weight t".into());
                        }
                    }
                }
            }
            FunctionKind::GeneralLowerBound { k, r } => {
                if *k == 0 || *k > 63 || *k >= n {
                    return bad(format!("general lower-bound needs 1 <= k <= 63 and k < n (k={k}, n={n})"));
                }
                if let PrefixSet::Explicit(v) = r {
                    if !v.windows(2).all(|w| w[0] < w[1]) {
                        return bad("R must be sorted and duplicate-free".into());
                    }
                    if let Some(p) = v.iter().find(|p| **p >> k != 0) {
                        return bad(format!("prefix {p:#x} wider than k={k} bits"));
                    }
                }
            }
            FunctionKind::TruthTable { table } => {
                if n > MAX_TRUTH_TABLE_N {
                    return bad(format!("truth table needs n <= {MAX_TRUTH_TABLE_N}, got {n}"));
                }
                if table.len() != (1usize << n).div_ceil(64) {
                    return bad(format!("truth table for n={n} needs {} words", (1usize << n).div_ceil(64)));
                }
            }
        }
        Ok(FunctionSpec { n, kind })
    }

    pub fn constant(n: usize, value: bool) -> Self {
        Self::new(n, FunctionKind::Constant(value)).expect("valid")
    }

    pub fn dictator(n: usize, i: usize) -> Result<Self> {
        Self::new(n, FunctionKind::Dictator { i })
    }

    pub fn threshold(n: usize, k: usize, t: usize) -> Result<Self> {
        Self::new(n, FunctionKind::Threshold { k, t })
    }

    /// Strict majority over all `n` coordinates: `tau^{floor(n/2)+1}_n`.
    pub fn majority(n: usize) -> Self {
        Self::threshold(n, n, n / 2 + 1).expect("valid")
    }

    pub fn parity(n: usize, a: usize, b: usize) -> Result<Self> {
        Self::new(n, FunctionKind::Parity { a, b })
    }

    pub fn parity_all(n: usize) -> Self {
        Self::parity(n, 1, n).expect("valid")
    }

    /// Truth table from a closure over integer-encoded points.
    pub fn truth_table_from_fn(n: usize, f: impl Fn(u64) -> bool) -> Result<Self> {
        if n > MAX_TRUTH_TABLE_N {
            return Err(Error::InvalidSpec(format!("truth table needs n <= {MAX_TRUTH_TABLE_N}")));
        }
        let mut table = alloc::vec![0u64; (1usize << n).div_ceil(64)];
        for x in 0..1u64 << n {
            if f(x) {
                table[(x / 64) as usize] |= 1 << (x % 64);
            }
        }
        Self::new(n, FunctionKind::TruthTable { table })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &FunctionKind {
        &self.kind
    }

    /// True when `f(x)` depends on `x` only through its Hamming weight.
    pub fn is_symmetric(&self) -> bool {
        match self.kind {
            FunctionKind::Constant(_) => true,
            FunctionKind::Threshold { k, .. } => k == self.n,
            FunctionKind::Parity { a, b } => a == 1 && b == self.n,
            _ => false,
        }
    }

    /// `Some(t)` when the function is the full-support threshold `tau^t_n`.
    pub fn full_threshold(&self) -> Option<usize> {
        match self.kind {
            FunctionKind::Threshold { k, t } if k == self.n => Some(t),
            _ => None,
        }
    }

    /// True for the families that are monotone by construction.
    pub fn is_monotone_by_construction(&self) -> bool {
        matches!(
            self.kind,
            FunctionKind::Constant(_)
                | FunctionKind::Dictator { .. }
                | FunctionKind::Threshold { .. }
                | FunctionKind::MonotoneLowerBound { .. }
        )
    }

    /// The prefix set `R`, for the lower-bound families.
    pub fn prefix_set(&self) -> Option<(usize, &PrefixSet)> {
        match &self.kind {
            FunctionKind::MonotoneLowerBound { k, r, .. } | FunctionKind::GeneralLowerBound { k, r } => Some((*k, r)),
            _ => None,
        }
    }

    /// Short human-readable label, e.g. `threshold(k=4,t=2)`.
    pub fn label(&self) -> alloc::string::String {
        match &self.kind {
            FunctionKind::Constant(b) => format!("constant{}", *b as u8),
            FunctionKind::Dictator { i } => format!("dictator(i={i})"),
            FunctionKind::Threshold { k, t } if *k == self.n && *t == self.n / 2 + 1 => "majority".into(),
            FunctionKind::Threshold { k, t } => format!("threshold(k={k},t={t})"),
            FunctionKind::Parity { a, b } if *a == 1 && *b == self.n => "parity".into(),
            FunctionKind::Parity { a, b } => format!("parity(a={a},b={b})"),
            FunctionKind::MonotoneLowerBound { k, t, .. } => format!("monotone_lowerbound(k={k},t={t})"),
            FunctionKind::GeneralLowerBound { k, .. } => format!("general_lowerbound(k={k})"),
            FunctionKind::TruthTable { .. } => "truth_table".into(),
        }
    }

    /// Value at a weight-`h` point; only for symmetric functions.
    pub fn value_at_weight(&self, h: u64) -> Result<bool> {
        if h > self.n as u64 {
            return Err(Error::WeightOutOfRange { weight: h, n: self.n as u64 });
        }
        match self.kind {
            FunctionKind::Constant(b) => Ok(b),
            FunctionKind::Threshold { k, t } if k == self.n => Ok(h >= t as u64),
            FunctionKind::Parity { a, b } if a == 1 && b == self.n => Ok(h % 2 == 1),
            _ => Err(Error::NotSymmetric),
        }
    }

    /// Evaluates at `p`, also reporting whether `p`'s prefix lies in `R`.
    pub fn eval_point(&self, p: &Point) -> Result<(bool, bool)> {
        if p.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: p.dim() });
        }
        Ok(self.eval_bits(p))
    }

    /// Evaluates at the integer-encoded point `x` (`n <= 64`).
    #[inline]
    pub fn eval_word(&self, x: u64) -> (bool, bool) {
        debug_assert!(self.n <= 64);
        self.eval_bits(&Word { n: self.n, x })
    }

    fn eval_bits<B: Bits>(&self, b: &B) -> (bool, bool) {
        let n = self.n;
        match &self.kind {
            FunctionKind::Constant(v) => (*v, false),
            FunctionKind::Dictator { i } => (b.bit(i - 1), false),
            FunctionKind::Threshold { k, t } => (b.weight(0, *k) >= *t, false),
            FunctionKind::Parity { a, b: hi } => (b.weight(a - 1, *hi) % 2 == 1, false),
            FunctionKind::MonotoneLowerBound { k, t, r, .. } => {
                if r.contains(b.prefix(*k)) {
                    // 1 iff sum_{i>k} x_i > (n-k)/2
                    (2 * b.weight(*k, n) > n - k, true)
                } else {
                    (b.weight(0, *k) >= *t, false)
                }
            }
            FunctionKind::GeneralLowerBound { k, r } => {
                if r.contains(b.prefix(*k)) {
                    (b.weight(*k, n) % 2 == 1, true)
                } else {
                    (b.bit(0), false)
                }
            }
            FunctionKind::TruthTable { table } => {
                let x = b.index();
                (table[(x / 64) as usize] >> (x % 64) & 1 == 1, false)
            }
        }
    }
}

trait Bits {
    fn bit(&self, i: usize) -> bool;
    fn weight(&self, start: usize, end: usize) -> usize;
    fn prefix(&self, k: usize) -> u64;
    fn index(&self) -> u64;
}

impl Bits for Point {
    #[inline]
    fn bit(&self, i: usize) -> bool {
        self.get(i)
    }
    #[inline]
    fn weight(&self, start: usize, end: usize) -> usize {
        self.weight_in_range(start, end)
    }
    #[inline]
    fn prefix(&self, k: usize) -> u64 {
        Point::prefix(self, k)
    }
    #[inline]
    fn index(&self) -> u64 {
        self.to_u64().expect("truth tables have n <= 24")
    }
}

struct Word {
    n: usize,
    x: u64,
}

impl Bits for Word {
    #[inline]
    fn bit(&self, i: usize) -> bool {
        self.x >> i & 1 == 1
    }
    #[inline]
    fn weight(&self, start: usize, end: usize) -> usize {
        let _ = self.n;
        let hi = if end >= 64 { u64::MAX } else { (1u64 << end) - 1 };
        let lo = if start >= 64 { 0 } else { u64::MAX << start };
        (self.x & hi & lo).count_ones() as usize
    }
    #[inline]
    fn prefix(&self, k: usize) -> u64 {
        if k >= 64 {
            self.x
        } else {
            self.x & ((1u64 << k) - 1)
        }
    }
    #[inline]
    fn index(&self) -> u64 {
        self.x
    }
}

/// Exact total influence for the families with a closed form.
pub fn closed_form_influence(spec: &FunctionSpec) -> Option<f64> {
    match spec.kind {
        FunctionKind::Constant(_) => Some(0.0),
        FunctionKind::Dictator { .. } => Some(1.0),
        FunctionKind::Parity { a, b } => Some((b - a + 1) as f64),
        FunctionKind::Threshold { k, t } => Some(threshold_influence(k as u64, t as u64)),
        _ => None,
    }
}

/// Oracle access to a function: every evaluation is counted, and queries
/// whose prefix lands in `R` are tallied separately.
#[derive(Clone, Debug)]
pub struct OracleHandle<'a> {
    spec: &'a FunctionSpec,
    query_count: u64,
    prefix_hits: u64,
    symmetric: bool,
}

pub fn make_counting_oracle(spec: &FunctionSpec) -> OracleHandle<'_> {
    OracleHandle::new(spec)
}

impl<'a> OracleHandle<'a> {
    pub fn new(spec: &'a FunctionSpec) -> Self {
        OracleHandle { spec, query_count: 0, prefix_hits: 0, symmetric: spec.is_symmetric() }
    }

    pub fn spec(&self) -> &'a FunctionSpec {
        self.spec
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn query_count(&self) -> u64 {
        self.query_count
    }

    pub fn prefix_hits(&self) -> u64 {
        self.prefix_hits
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Forces point-level evaluation even for symmetric functions.
    pub fn disable_weight_path(&mut self) {
        self.symmetric = false;
    }

    pub fn evaluate(&mut self, p: &Point) -> Result<bool> {
        let (value, hit) = self.spec.eval_point(p)?;
        self.query_count += 1;
        self.prefix_hits += hit as u64;
        Ok(value)
    }

    /// Evaluation at an integer-encoded point (`n <= 64`).
    pub fn evaluate_word(&mut self, x: u64) -> Result<bool> {
        if self.spec.dim() > 64 {
            return Err(Error::DimensionTooLarge { n: self.spec.dim(), max: 64 });
        }
        let (value, hit) = self.spec.eval_word(x);
        self.query_count += 1;
        self.prefix_hits += hit as u64;
        Ok(value)
    }

    /// Evaluation at any point of weight `h`; symmetric functions only.
    pub fn evaluate_at_weight(&mut self, h: u64) -> Result<bool> {
        if !self.symmetric {
            return Err(Error::NotSymmetric);
        }
        let value = self.spec.value_at_weight(h)?;
        self.query_count += 1;
        Ok(value)
    }
}
