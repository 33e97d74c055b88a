//! G(n,p) sampling, triangle counting and the closed-form moments of the
//! triangle count.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::{self, StreamRng};
use crate::scalar::{binomial, from_count, Real, Scalar};

/// Largest vertex count accepted by the sampler.
pub const MAX_VERTICES: usize = 1 << 16;

/// Below this edge probability rows are filled by geometric skipping.
pub const SPARSE_THRESHOLD: f64 = 0.05;

/// Simple undirected graph stored as `n` rows of 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitGraph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitGraph {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64);
        Self { n, words, bits: vec![0; n * words] }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::empty(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    /// Cycle `0 - 1 - ... - (n-1) - 0`.
    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::from_edges(n, &edges)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn words_per_row(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn row(&self, u: usize) -> &[u64] {
        &self.bits[u * self.words..(u + 1) * self.words]
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    /// Adds `uv` in both rows. Loops are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u == v {
            return;
        }
        self.bits[u * self.words + v / 64] |= 1 << (v % 64);
        self.bits[v * self.words + u / 64] |= 1 << (u % 64);
    }

    pub fn edge_count(&self) -> u64 {
        self.bits.iter().map(|w| u64::from(w.count_ones())).sum::<u64>() / 2
    }

    fn clear(&mut self) {
        self.bits.iter_mut().for_each(|w| *w = 0);
    }

    /// Symmetric with an empty diagonal.
    pub fn is_well_formed(&self) -> bool {
        (0..self.n).all(|u| {
            !self.has_edge(u, u) && (u + 1..self.n).all(|v| self.has_edge(u, v) == self.has_edge(v, u))
        })
    }
}

/// One draw of G(n,p) together with the stream that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct GnpSample {
    pub graph: BitGraph,
    pub p: f64,
    pub seed: u64,
    pub stream_id: u64,
}

impl GnpSample {
    pub fn n(&self) -> usize {
        self.graph.n()
    }
}

fn check_gnp_params(n: usize, p: f64) -> Result<()> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    if n > MAX_VERTICES {
        return invalid(format!("n = {n} exceeds the supported maximum {MAX_VERTICES}"));
    }
    if !(0.0..=1.0).contains(&p) {
        return invalid(format!("p = {p} is not a probability"));
    }
    Ok(())
}

/// Samples G(n,p) from stream `stream_id` of `seed`.
pub fn sample_gnp(n: usize, p: f64, seed: u64, stream_id: u64) -> Result<GnpSample> {
    check_gnp_params(n, p)?;
    let mut graph = BitGraph::empty(n);
    let mut rng = rng::stream(seed, stream_id);
    fill_gnp(&mut graph, p, &mut rng);
    Ok(GnpSample { graph, p, seed, stream_id })
}

/// Reusable sampler that redraws into one buffer; used in the hot loops.
#[derive(Debug, Clone)]
pub struct GnpSampler {
    graph: BitGraph,
    p: f64,
}

impl GnpSampler {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        check_gnp_params(n, p)?;
        Ok(Self { graph: BitGraph::empty(n), p })
    }

    pub fn draw(&mut self, rng: &mut StreamRng) -> &BitGraph {
        fill_gnp(&mut self.graph, self.p, rng);
        &self.graph
    }

    /// Triangle count of the graph `draw` would return from the same stream
    /// state, without mirroring the rows.
    pub fn draw_count(&mut self, rng: &mut StreamRng) -> u64 {
        fill_upper(&mut self.graph, self.p, rng);
        count_triangles(&self.graph)
    }
}

/// Overwrites `g` with a fresh G(n,p) draw. Row `u` is filled for columns
/// `v > u` first, then mirrored, so the draw is fixed by the stream alone.
pub fn fill_gnp(g: &mut BitGraph, p: f64, rng: &mut StreamRng) {
    fill_upper(g, p, rng);
    for u in 0..g.n() {
        for wi in 0..g.words {
            let mut word = g.bits[u * g.words + wi];
            while word != 0 {
                let v = wi * 64 + word.trailing_zeros() as usize;
                word &= word - 1;
                g.bits[v * g.words + u / 64] |= 1 << (u % 64);
            }
        }
    }
}

/// Only bits `v > u` of row `u` are set.
fn fill_upper(g: &mut BitGraph, p: f64, rng: &mut StreamRng) {
    g.clear();
    if p <= 0.0 || g.n() < 2 {
        return;
    }
    if p < SPARSE_THRESHOLD {
        fill_sparse(g, p, rng);
    } else {
        fill_dense(g, p, rng);
    }
}

/// Each pair compares a uniform 32-bit `U` with `P = floor(p·2³²)`; 64 pairs
/// are decided together by scanning the bits of `P` from the top, one
/// random word per level, until no pair is left undecided.
fn fill_dense(g: &mut BitGraph, p: f64, rng: &mut StreamRng) {
    let (n, words) = (g.n(), g.words);
    let threshold = (p * 4_294_967_296.0).floor() as u64;
    let levels: Vec<bool> = if threshold >> 32 != 0 {
        Vec::new()
    } else {
        (threshold.trailing_zeros()..32).rev().map(|j| threshold >> j & 1 == 1).collect()
    };
    let tail = if n % 64 == 0 { u64::MAX } else { !mask_from(n % 64) };
    for u in 0..n - 1 {
        let first = (u + 1) / 64;
        for wi in first..words {
            let mut mask = if wi == first { mask_from((u + 1) % 64) } else { u64::MAX };
            if wi == words - 1 {
                mask &= tail;
            }
            let word = if threshold >> 32 != 0 { u64::MAX } else { bernoulli_word(&levels, rng) };
            g.bits[u * words + wi] = word & mask;
        }
    }
}

fn bernoulli_word(levels: &[bool], rng: &mut StreamRng) -> u64 {
    let mut result = 0u64;
    let mut undecided = u64::MAX;
    for &bit in levels {
        let r: u64 = rng.random();
        if bit {
            result |= undecided & !r;
            undecided &= r;
        } else {
            undecided &= !r;
        }
        if undecided == 0 {
            break;
        }
    }
    result
}

fn fill_sparse(g: &mut BitGraph, p: f64, rng: &mut StreamRng) {
    let n = g.n();
    let log_q = (-p).ln_1p();
    for u in 0..n.saturating_sub(1) {
        let mut v = u + 1;
        loop {
            // uniform in (0, 1]
            let unit = ((rng.random::<u64>() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
            let skip = (unit.ln() / log_q).floor();
            if !skip.is_finite() || skip >= (n - v) as f64 {
                break;
            }
            v += skip as usize;
            g.bits[u * g.words + v / 64] |= 1 << (v % 64);
            v += 1;
            if v >= n {
                break;
            }
        }
    }
}

/// Triangle count by row intersection: every edge `uv` with `u < v`
/// contributes `|N(u) ∩ N(v) ∩ {w > v}|`. Only bits above the diagonal are
/// read.
pub fn count_triangles(g: &BitGraph) -> u64 {
    let n = g.n();
    let words = g.words_per_row();
    let mut total = 0u64;
    for u in 0..n {
        let ru = g.row(u);
        for wi in (u + 1) / 64..words {
            let mut word = ru[wi];
            if wi == (u + 1) / 64 {
                word &= mask_from((u + 1) % 64);
            }
            while word != 0 {
                let v = wi * 64 + word.trailing_zeros() as usize;
                word &= word - 1;
                let from = v + 1;
                if from >= n {
                    continue;
                }
                let rv = g.row(v);
                let start = from / 64;
                let head = (ru[start] & rv[start] & mask_from(from % 64)).count_ones();
                let rest: u32 = ru[start + 1..].iter().zip(&rv[start + 1..]).map(|(a, b)| (a & b).count_ones()).sum();
                total += u64::from(head + rest);
            }
        }
    }
    total
}

#[inline]
fn mask_from(bit: usize) -> u64 {
    u64::MAX << bit
}

/// Reference O(n³) triple loop.
pub fn count_triangles_naive(g: &BitGraph) -> u64 {
    let n = g.n();
    let mut total = 0;
    for u in 0..n {
        for v in u + 1..n {
            if !g.has_edge(u, v) {
                continue;
            }
            for w in v + 1..n {
                if g.has_edge(u, w) && g.has_edge(v, w) {
                    total += 1;
                }
            }
        }
    }
    total
}

/// Mean and variance of the triangle count in G(n,p).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments<S> {
    pub n: u64,
    pub p: S,
    pub mu: S,
    pub sigma2: S,
}

impl<T: Real> Moments<T> {
    pub fn sigma(&self) -> T {
        self.sigma2.sqrt()
    }

    /// Builds moments from explicit values; used for synthetic laws.
    pub fn from_parts(n: u64, p: T, mu: T, sigma2: T) -> Self {
        Self { n, p, mu, sigma2 }
    }
}

/// `μ = C(n,3)p³` and
/// `σ² = C(n,3)(p³ − p⁶) + 2·C(n,2)·C(n−2,2)·(p⁵ − p⁶)`.
///
/// The second term counts ordered pairs of triangles sharing one edge;
/// vertex- or edge-disjoint pairs are independent and contribute nothing.
pub fn moments<S: Scalar>(n: u64, p: S) -> Result<Moments<S>> {
    if n < 3 {
        return invalid(format!("moments need n >= 3, got {n}"));
    }
    if !(p > S::zero() && p < S::one()) {
        return invalid(format!("moments need 0 < p < 1, got {p:?}"));
    }
    let p3 = p.clone() * p.clone() * p.clone();
    let p5 = p3.clone() * p.clone() * p.clone();
    let p6 = p3.clone() * p3.clone();
    let triples: S = from_count(binomial(n, 3) as u64);
    let shared = 2 * binomial(n, 2) * binomial(n - 2, 2);
    let shared: S = S::from_u128(shared).expect("scalar type cannot represent a pair count");
    let mu = triples.clone() * p3.clone();
    let sigma2 = triples * (p3 - p6.clone()) + shared * (p5 - p6);
    Ok(Moments { n, p, mu, sigma2 })
}

/// A raw triangle count and its standardized position on the lattice
/// `(Z − μ)/σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticePoint<T> {
    pub k: u64,
    pub x: T,
}

pub fn standardize<T: Real>(k: u64, m: &Moments<T>) -> Result<LatticePoint<T>> {
    let sigma = m.sigma();
    if !(sigma > T::zero()) {
        return Err(Error::Degenerate(format!("sigma = {sigma:?}")));
    }
    let k_t: T = from_count(k);
    Ok(LatticePoint { k, x: (k_t - m.mu) / sigma })
}

/// Inverse of [`standardize`]: the integer count nearest to `x·σ + μ`.
pub fn unstandardize<T: Real>(x: T, m: &Moments<T>) -> u64 {
    let k = (x * m.sigma() + m.mu).round();
    k.to_u64().unwrap_or(0)
}
