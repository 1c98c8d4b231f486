//! Points of the Boolean lattice `{0,1}^n` and downward random walks.
//!
//! Coordinate `x_i` (1-based, as in the usual notation) is stored at bit
//! `i - 1`, least-significant bit first, in a packed `u64` word vector.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::{Error, Result};

const WORD_BITS: usize = 64;

/// Level at which a downward walk halts early; `None` disables the cut-off.
pub type CutoffLevel = Option<u64>;

/// Cut-off level `floor(n/2) - s* - 1`, or `None` when that is negative.
pub fn cutoff_level(n: u64, s_star: u64) -> CutoffLevel {
    (n / 2).checked_sub(s_star + 1)
}

/// A lattice point with a cached Hamming weight.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Point {
    n: usize,
    words: Vec<u64>,
    weight: usize,
}

impl Point {
    pub fn zeros(n: usize) -> Self {
        Point { n, words: vec![0; n.div_ceil(WORD_BITS)], weight: 0 }
    }

    pub fn ones(n: usize) -> Self {
        let mut words = vec![u64::MAX; n.div_ceil(WORD_BITS)];
        if let Some(last) = words.last_mut() {
            *last &= top_mask(n);
        }
        Point { n, words, weight: n }
    }

    /// Point from the low `n` bits of `x` (`n <= 64`).
    pub fn from_u64(n: usize, x: u64) -> Self {
        assert!(n <= WORD_BITS, "from_u64 needs n <= 64");
        let x = if n == WORD_BITS { x } else { x & ((1u64 << n) - 1) };
        let words = if n == 0 { Vec::new() } else { vec![x] };
        Point { n, words, weight: x.count_ones() as usize }
    }

    /// Parses a string of `'0'`/`'1'` where the first character is `x_1`.
    pub fn parse_bits(s: &str) -> Option<Self> {
        let mut p = Point::zeros(s.len());
        for (i, c) in s.bytes().enumerate() {
            match c {
                b'0' => {}
                b'1' => p.set(i, true),
                _ => return None,
            }
        }
        Some(p)
    }

    pub fn from_words(n: usize, mut words: Vec<u64>) -> Self {
        words.resize(n.div_ceil(WORD_BITS), 0);
        if let Some(last) = words.last_mut() {
            *last &= top_mask(n);
        }
        let weight = words.iter().map(|w| w.count_ones() as usize).sum();
        Point { n, words, weight }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn hamming_weight(&self) -> usize {
        self.weight
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Integer encoding when `n <= 64`.
    pub fn to_u64(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    /// Bit at 0-based position `i`.
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.n);
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        if self.get(i) != value {
            self.flip(i);
        }
    }

    /// Flips 0-based coordinate `i`; the weight moves by exactly one.
    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.n);
        let mask = 1u64 << (i % WORD_BITS);
        let word = &mut self.words[i / WORD_BITS];
        if *word & mask == 0 {
            self.weight += 1;
        } else {
            self.weight -= 1;
        }
        *word ^= mask;
    }

    /// The first `k <= 64` coordinates as an integer (`x_1` at bit 0).
    #[inline]
    pub fn prefix(&self, k: usize) -> u64 {
        debug_assert!(k <= WORD_BITS && k <= self.n);
        match k {
            0 => 0,
            WORD_BITS => self.words[0],
            _ => self.words[0] & ((1u64 << k) - 1),
        }
    }

    /// Number of ones among 0-based positions `start..end`.
    pub fn weight_in_range(&self, start: usize, end: usize) -> usize {
        debug_assert!(start <= end && end <= self.n);
        if start == 0 && end == self.n {
            return self.weight;
        }
        if start == end {
            return 0;
        }
        let (first, last) = (start / WORD_BITS, (end - 1) / WORD_BITS);
        let lo_mask = u64::MAX << (start % WORD_BITS);
        let hi_mask = top_mask(end);
        if first == last {
            return (self.words[first] & lo_mask & hi_mask).count_ones() as usize;
        }
        let mut total = (self.words[first] & lo_mask).count_ones() as usize;
        total += self.words[first + 1..last].iter().map(|w| w.count_ones() as usize).sum::<usize>();
        total + (self.words[last] & hi_mask).count_ones() as usize
    }

    /// 0-based position of the `rank`-th set bit (`rank < weight`).
    fn select(&self, mut rank: usize) -> usize {
        for (wi, &word) in self.words.iter().enumerate() {
            let c = word.count_ones() as usize;
            if rank < c {
                return wi * WORD_BITS + select_in_word(word, rank);
            }
            rank -= c;
        }
        unreachable!("rank beyond weight")
    }
}

// Mask for the valid bits of the last word of an `n`-bit vector.
#[inline]
fn top_mask(n: usize) -> u64 {
    match n % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

#[inline]
fn select_in_word(mut word: u64, rank: usize) -> usize {
    for _ in 0..rank {
        word &= word - 1;
    }
    word.trailing_zeros() as usize
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n <= 128 {
            for i in 0..self.n {
                f.write_str(if self.get(i) { "1" } else { "0" })?;
            }
            Ok(())
        } else {
            write!(f, "Point(n={}, weight={})", self.n, self.weight)
        }
    }
}

/// A reproducible random stream identified by `(seed, stream id)`.
///
/// ChaCha8 keyed by `seed` with the stream id selecting an independent
/// 2^64-block substream, so distinct ids never overlap.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl RngCore for RngStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

pub fn hamming_weight(p: &Point) -> usize {
    p.hamming_weight()
}

/// Uniform point of `{0,1}^n`.
pub fn sample_uniform_point<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Point {
    let mut words: Vec<u64> = (0..n.div_ceil(WORD_BITS)).map(|_| rng.next_u64()).collect();
    if let Some(last) = words.last_mut() {
        *last &= top_mask(n);
    }
    let weight = words.iter().map(|w| w.count_ones() as usize).sum();
    Point { n, words, weight }
}

/// Draws the Hamming weight of a uniform point of `{0,1}^n`, i.e.
/// `Binomial(n, 1/2)`, without materializing the point.
#[derive(Clone, Debug)]
pub struct UniformWeightSampler {
    dist: Binomial,
}

impl UniformWeightSampler {
    pub fn new(n: u64) -> Self {
        UniformWeightSampler { dist: Binomial::new(n, 0.5).expect("p = 1/2 is valid") }
    }

    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> u64 {
        self.dist.sample(rng)
    }
}

/// Flips one uniformly chosen 1-coordinate of `p` to 0 and returns its
/// 0-based index.
pub fn step_down<R: RngCore + ?Sized>(p: &mut Point, rng: &mut R) -> Result<usize> {
    if p.weight == 0 {
        return Err(Error::NoDownwardStep);
    }
    let rank = rng.random_range(0..p.weight);
    let i = p.select(rank);
    p.flip(i);
    Ok(i)
}

#[inline]
fn clamp_level(cutoff: CutoffLevel) -> u64 {
    cutoff.unwrap_or(0)
}

/// Endpoint weight of a downward walk of length `w` from weight `h`.
///
/// The walk stops after `w` steps, at the cut-off level, or at weight zero,
/// whichever comes first; a start at or below the cut-off takes no steps.
pub fn walk_down_weight(h: u64, w: u64, cutoff: CutoffLevel) -> u64 {
    let clamp = clamp_level(cutoff);
    if h <= clamp {
        h
    } else {
        h.saturating_sub(w).max(clamp)
    }
}

/// Walks `v` down in place and returns the number of steps taken.
pub fn walk_down_in_place<R: RngCore + ?Sized>(v: &mut Point, w: u64, cutoff: CutoffLevel, rng: &mut R) -> u64 {
    let target = walk_down_weight(v.weight as u64, w, cutoff);
    let steps = v.weight as u64 - target;
    for _ in 0..steps {
        step_down(v, rng).expect("target weight is non-negative");
    }
    steps
}

/// Downward walk of length `w` from `v` with an optional cut-off.
pub fn walk_down<R: RngCore + ?Sized>(v: &Point, w: u64, cutoff: CutoffLevel, rng: &mut R) -> Point {
    let mut u = v.clone();
    walk_down_in_place(&mut u, w, cutoff, rng);
    u
}
