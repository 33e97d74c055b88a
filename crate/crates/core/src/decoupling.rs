//! The α-function of two independent copies `G⁰, G¹` of G(n,p).
//!
//! For an m-endowed partition `P1 ∪ P2 ∪ P3` and a cross pair `f = uv`,
//! `u ∈ P1, v ∈ P2`,
//!
//! ```text
//! α_f = Σ_{w ∈ P3} (x⁰_uw − x¹_uw)(x⁰_vw − x¹_vw),    α = Σ_f α_f x⁰_f.
//! ```
//!
//! Conditioned on the edges between `P1 ∪ P2` and `P3` in both copies, `α`
//! is a weighted sum of independent Bernoulli(p) variables, so
//! `|E_{x_A⁰} e^{itα/σ}|` has a closed form. Averaging it over the
//! conditioning bounds `|E e^{itX/σ}|⁴` from above.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charfn::{estimate_charfn, Z95};
use crate::error::{domain, invalid, Error, Result};
use crate::graph::{moments, BitGraph, GnpSample, GnpSampler};
use crate::oracle::{build_table_with_ceiling, charfn_of_pmf, exact_pmf};
use crate::rng;

/// Stream reserved for drawing the vertex partition.
const PARTITION_STREAM: u64 = u64::MAX;
/// Seed offset separating the two sides of a Monte Carlo decoupling check.
const RHS_SEED_MIX: u64 = 0x9e37_79b9_7f4a_7c15;
/// Largest `2|B|` enumerated exactly.
pub const MAX_EXACT_BITS: usize = 26;
const EXACT_CHUNK: u64 = 1 << 12;

/// `[n] = P1 ∪ P2 ∪ P3` with `|P1| = ⌊(n−m)/2⌋`, `|P2| = ⌈(n−m)/2⌉`,
/// `|P3| = m`. `A = P1 × P2`, `B = (P1 ∪ P2) × P3`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndowedPartition {
    pub n: usize,
    pub m: usize,
    pub p1: Vec<usize>,
    pub p2: Vec<usize>,
    pub p3: Vec<usize>,
}

impl EndowedPartition {
    fn from_order(n: usize, m: usize, order: &[usize]) -> Self {
        let a = (n - m) / 2;
        let b = (n - m).div_ceil(2);
        Self {
            n,
            m,
            p1: order[..a].to_vec(),
            p2: order[a..a + b].to_vec(),
            p3: order[a + b..].to_vec(),
        }
    }

    /// `P1 = {0..a}`, `P2` the next block, `P3` the last `m` vertices.
    pub fn canonical(n: usize, m: usize) -> Result<Self> {
        check_sizes(n, m)?;
        let order: Vec<usize> = (0..n).collect();
        Ok(Self::from_order(n, m, &order))
    }

    pub fn a_size(&self) -> usize {
        self.p1.len() * self.p2.len()
    }

    pub fn b_size(&self) -> usize {
        (self.p1.len() + self.p2.len()) * self.p3.len()
    }
}

fn check_sizes(n: usize, m: usize) -> Result<()> {
    if m == 0 || m >= n {
        return invalid(format!("partition needs 1 <= m < n, got m = {m}, n = {n}"));
    }
    Ok(())
}

/// Uniformly random partition with the mandated block sizes.
pub fn make_partition(n: usize, m: usize, seed: u64) -> Result<EndowedPartition> {
    check_sizes(n, m)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(seed, PARTITION_STREAM));
    Ok(EndowedPartition::from_order(n, m, &order))
}

/// Which pairs count as typical.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaWindow {
    /// Window on `|α_f|` when true, on the signed `α_f` otherwise.
    pub absolute: bool,
    pub lower: f64,
    pub upper: f64,
}

impl AlphaWindow {
    /// `α_f ∈ (½·√E α_f², 2³·√E α_f²)` with `E α_f² = 4p²(1−p)²m`.
    pub fn lemma(p: f64, m: usize) -> Self {
        Self::lemma_with(p, m, 8.0)
    }

    pub fn lemma_with(p: f64, m: usize, upper_factor: f64) -> Self {
        let scale = expected_alpha_sq(p, m).sqrt();
        Self { absolute: false, lower: 0.5 * scale, upper: upper_factor * scale }
    }

    /// `|α_f| ∈ (√(p²m)/2, 2⁴√(p²m))`; the default convention.
    pub fn proof(p: f64, m: usize) -> Self {
        Self::proof_with(p, m, 16.0)
    }

    pub fn proof_with(p: f64, m: usize, upper_factor: f64) -> Self {
        let scale = (p * p * m as f64).sqrt();
        Self { absolute: true, lower: 0.5 * scale, upper: upper_factor * scale }
    }

    /// `|α_f| = 1`.
    pub fn unit() -> Self {
        Self { absolute: true, lower: 0.5, upper: 1.5 }
    }

    pub fn contains(&self, alpha: i32) -> bool {
        let a = if self.absolute { alpha.abs() } else { alpha } as f64;
        a > self.lower && a < self.upper
    }
}

/// `E α_f² = 4p²(1−p)²m`.
pub fn expected_alpha_sq(p: f64, m: usize) -> f64 {
    4.0 * p * p * (1.0 - p) * (1.0 - p) * m as f64
}

/// `α_f` for every `f ∈ A` (index `i·|P2| + j` for `P1[i], P2[j]`), the
/// typical set under a window, and `α` itself.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaProfile {
    pub partition: EndowedPartition,
    pub alphas: Vec<i32>,
    pub window: AlphaWindow,
    pub a_prime: Vec<usize>,
    pub expected_alpha_sq: f64,
    /// `Σ_f α_f x⁰_f`
    pub alpha: i64,
}

/// Per-vertex signed differences towards `P3` packed as two bitsets.
struct SignedRows {
    words: usize,
    pos: Vec<u64>,
    neg: Vec<u64>,
}

impl SignedRows {
    fn new(g0: &BitGraph, g1: &BitGraph, part: &EndowedPartition, vertices: &[usize]) -> Self {
        let words = part.p3.len().div_ceil(64);
        let mut pos = vec![0u64; vertices.len() * words];
        let mut neg = vec![0u64; vertices.len() * words];
        for (i, &u) in vertices.iter().enumerate() {
            for (j, &w) in part.p3.iter().enumerate() {
                let (a, b) = (g0.has_edge(u, w), g1.has_edge(u, w));
                let slot = i * words + j / 64;
                if a && !b {
                    pos[slot] |= 1 << (j % 64);
                } else if b && !a {
                    neg[slot] |= 1 << (j % 64);
                }
            }
        }
        Self { words, pos, neg }
    }

    fn row(&self, i: usize) -> (&[u64], &[u64]) {
        let r = i * self.words..(i + 1) * self.words;
        (&self.pos[r.clone()], &self.neg[r])
    }
}

fn signed_dot(a: (&[u64], &[u64]), b: (&[u64], &[u64])) -> i32 {
    let mut acc = 0i32;
    for k in 0..a.0.len() {
        acc += (a.0[k] & b.0[k]).count_ones() as i32 + (a.1[k] & b.1[k]).count_ones() as i32;
        acc -= (a.0[k] & b.1[k]).count_ones() as i32 + (a.1[k] & b.0[k]).count_ones() as i32;
    }
    acc
}

/// `α_f` for all cross pairs, from the `B`-edges of the two graphs.
pub fn alphas_of_graphs(g0: &BitGraph, g1: &BitGraph, part: &EndowedPartition) -> Vec<i32> {
    let r1 = SignedRows::new(g0, g1, part, &part.p1);
    let r2 = SignedRows::new(g0, g1, part, &part.p2);
    let mut out = Vec::with_capacity(part.a_size());
    for i in 0..part.p1.len() {
        for j in 0..part.p2.len() {
            out.push(signed_dot(r1.row(i), r2.row(j)));
        }
    }
    out
}

fn profile_from(
    g0: &BitGraph,
    g1: &BitGraph,
    part: &EndowedPartition,
    p: f64,
    window: AlphaWindow,
) -> AlphaProfile {
    let alphas = alphas_of_graphs(g0, g1, part);
    let a_prime = alphas.iter().enumerate().filter(|(_, &a)| window.contains(a)).map(|(f, _)| f).collect();
    let width = part.p2.len();
    let alpha = alphas
        .iter()
        .enumerate()
        .filter(|(f, _)| g0.has_edge(part.p1[f / width], part.p2[f % width]))
        .map(|(_, &a)| i64::from(a))
        .sum();
    AlphaProfile {
        partition: part.clone(),
        alphas,
        window,
        a_prime,
        expected_alpha_sq: expected_alpha_sq(p, part.m),
        alpha,
    }
}

pub fn compute_alphas(
    g0: &GnpSample,
    g1: &GnpSample,
    part: &EndowedPartition,
    window: AlphaWindow,
) -> Result<AlphaProfile> {
    if g0.n() != g1.n() || g0.n() != part.n {
        return invalid(format!("vertex counts differ: {}, {}, partition {}", g0.n(), g1.n(), part.n));
    }
    if g0.p != g1.p {
        return invalid(format!("edge probabilities differ: {} vs {}", g0.p, g1.p));
    }
    Ok(profile_from(&g0.graph, &g1.graph, part, g0.p, window))
}

/// `|Π_f (1 − p + p·e^{itα_f/σ})|` for a list of weights `α_f`.
pub fn product_modulus(alphas: impl IntoIterator<Item = i32>, p: f64, t: f64, sigma: f64) -> f64 {
    let mut counts: BTreeMap<i32, u64> = BTreeMap::new();
    for a in alphas {
        if a != 0 {
            *counts.entry(a.abs()).or_insert(0) += 1;
        }
    }
    let c = 2.0 * p * (1.0 - p);
    let mut log = 0.0;
    for (a, k) in counts {
        let sq = 1.0 - c * (1.0 - (t * a as f64 / sigma).cos());
        if sq <= 0.0 {
            return 0.0;
        }
        log += 0.5 * k as f64 * sq.ln();
    }
    log.exp()
}

/// `|E_{x_A⁰} e^{itα/σ}|` given the conditioning, over all of `A` or over
/// the typical set only.
pub fn inner_charfn_product(profile: &AlphaProfile, restrict_to_a_prime: bool, p: f64, t: f64, sigma: f64) -> f64 {
    if restrict_to_a_prime {
        product_modulus(profile.a_prime.iter().map(|&f| profile.alphas[f]), p, t, sigma)
    } else {
        product_modulus(profile.alphas.iter().copied(), p, t, sigma)
    }
}

/// Both sides of `|E e^{itX/σ}|⁴ ≤ E_{x_B^{0,1}} |E_{x_A⁰} e^{itα/σ}|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecouplingCheck {
    pub t: f64,
    /// `|E e^{itX/σ}|`
    pub lhs: f64,
    pub lhs_ci: f64,
    pub rhs: f64,
    pub rhs_ci: f64,
    /// `rhs − lhs⁴`
    pub margin: f64,
}

impl DecouplingCheck {
    /// Radius on `margin` combining both sides (delta method on `lhs⁴`).
    pub fn combined_ci(&self) -> f64 {
        self.rhs_ci + 4.0 * (self.lhs + self.lhs_ci).powi(3) * self.lhs_ci
    }
}

/// Monte Carlo version: the left side from `estimate_charfn`, the right side
/// averaged over `outer_samples` independent pairs `(G⁰, G¹)`.
pub fn verify_decoupling(
    n: usize,
    m: usize,
    p: f64,
    t_grid: &[f64],
    outer_samples: u64,
    seed: u64,
) -> Result<Vec<DecouplingCheck>> {
    let part = make_partition(n, m, seed)?;
    let sigma = moments(n as u64, p)?.sigma();
    let lhs = estimate_charfn(n as u64, p, t_grid, outer_samples, seed)?;
    let rhs_seed = seed ^ RHS_SEED_MIX;
    let chunks = rng::split_even(outer_samples, crate::charfn::CHARFN_BATCHES);
    let window = AlphaWindow::proof(p, m);
    let grid = &lhs.t_grid;
    let batch_sums = rng::map_chunks(rhs_seed, &chunks, |chunk, rng| -> Result<Vec<f64>> {
        let mut s0 = GnpSampler::new(n, p)?;
        let mut s1 = GnpSampler::new(n, p)?;
        let mut sums = vec![0.0; grid.len()];
        for _ in 0..chunk.len {
            let g0 = s0.draw(rng).clone();
            let g1 = s1.draw(rng);
            let prof = profile_from(&g0, g1, &part, p, window);
            for (s, &t) in sums.iter_mut().zip(grid) {
                *s += inner_charfn_product(&prof, false, p, t, sigma);
            }
        }
        Ok(sums)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    Ok((0..grid.len())
        .map(|i| {
            let total: f64 = batch_sums.iter().map(|b| b[i]).sum();
            let rhs = total / outer_samples as f64;
            let means: Vec<f64> = batch_sums.iter().zip(&chunks).map(|(b, c)| b[i] / c.len as f64).collect();
            let l = lhs.estimates[i].norm();
            DecouplingCheck {
                t: grid[i],
                lhs: l,
                lhs_ci: lhs.ci_radius[i],
                rhs,
                rhs_ci: real_batch_radius(&means),
                margin: rhs - l.powi(4),
            }
        })
        .collect())
}

fn real_batch_radius(means: &[f64]) -> f64 {
    if means.len() < 2 {
        return 0.0;
    }
    let b = means.len() as f64;
    let c = means.iter().sum::<f64>() / b;
    let var = means.iter().map(|x| (x - c) * (x - c)).sum::<f64>() / (b - 1.0);
    Z95 * (var / b).sqrt()
}

/// Both sides computed without sampling: the left from the enumerated law
/// of `X`, the right by summing over all `2^{2|B|}` outcomes of `x_B^{0,1}`
/// on the canonical partition.
pub fn exact_decoupling(n: usize, m: usize, p: f64, t_grid: &[f64], ceiling: usize) -> Result<Vec<DecouplingCheck>> {
    let part = EndowedPartition::canonical(n, m)?;
    let b_edges: Vec<(usize, usize)> = part
        .p1
        .iter()
        .chain(&part.p2)
        .flat_map(|&u| part.p3.iter().map(move |&w| (u, w)))
        .collect();
    let bits = 2 * b_edges.len();
    if bits > MAX_EXACT_BITS {
        return Err(Error::ResourceLimit(format!("2|B| = {bits} exceeds {MAX_EXACT_BITS}")));
    }
    let table = build_table_with_ceiling(n, ceiling)?;
    let mom = moments(n as u64, p)?;
    let sigma = mom.sigma();
    let pmf = exact_pmf(&table, p);

    // total probability of each α-vector, grouped to cut the per-t work;
    // fixed chunks merged in order keep the float sums thread-count free
    let total = 1u64 << bits;
    let chunk = EXACT_CHUNK.min(total);
    let partial: Vec<BTreeMap<Vec<i32>, f64>> = (0..total / chunk)
        .into_par_iter()
        .map(|c| {
            let mut acc = BTreeMap::new();
            for mask in c * chunk..(c + 1) * chunk {
                let mut g0 = BitGraph::empty(n);
                let mut g1 = BitGraph::empty(n);
                for (i, &(u, w)) in b_edges.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        g0.add_edge(u, w);
                    }
                    if mask >> (i + b_edges.len()) & 1 == 1 {
                        g1.add_edge(u, w);
                    }
                }
                let mut key = alphas_of_graphs(&g0, &g1, &part);
                key.sort_unstable();
                let ones = mask.count_ones() as i32;
                *acc.entry(key).or_insert(0.0) += p.powi(ones) * (1.0 - p).powi(bits as i32 - ones);
            }
            acc
        })
        .collect();
    let mut classes: BTreeMap<Vec<i32>, f64> = BTreeMap::new();
    for part in partial {
        for (k, v) in part {
            *classes.entry(k).or_insert(0.0) += v;
        }
    }

    let mut grid = t_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    Ok(grid
        .into_iter()
        .map(|t| {
            let lhs = charfn_of_pmf(&pmf, t / sigma).norm();
            let rhs: f64 =
                classes.iter().map(|(alphas, w)| w * product_modulus(alphas.iter().copied(), p, t, sigma)).sum();
            DecouplingCheck { t, lhs, lhs_ci: 0.0, rhs, rhs_ci: 0.0, margin: rhs - lhs.powi(4) }
        })
        .collect())
}

/// One row of a typical-α experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: u64,
    pub m: usize,
    pub a_size: usize,
    /// `|A′|` under the default (absolute-value) window.
    pub a_prime: usize,
    /// `|A′|` under the signed window.
    pub a_prime_signed: usize,
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalAlphaReport {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub trials: u64,
    pub threshold: f64,
    pub window_absolute: AlphaWindow,
    pub window_signed: AlphaWindow,
    /// Fraction of trials with `|A′| ≥ |A|/2⁷`, absolute window.
    pub frequency: f64,
    pub frequency_signed: f64,
    pub ratio_min: f64,
    pub ratio_mean: f64,
    pub ratio_max: f64,
    pub expected_alpha_sq: f64,
    pub empirical_alpha_sq: f64,
    pub empirical_alpha_sq_se: f64,
    /// `α_f²` over `A` in the first trial, for Paley–Zygmund checks.
    pub first_trial_alpha_sq: Vec<f64>,
    pub rows: Vec<TrialRow>,
}

/// Independent `(G⁰, G¹)` pairs on one fixed partition; trial `i` draws
/// `G⁰` from stream `2i` and `G¹` from stream `2i + 1`.
pub fn typical_alpha_trial(n: usize, m: usize, p: f64, trials: u64, seed: u64) -> Result<TypicalAlphaReport> {
    let q = p * (1.0 - p);
    let floor = 1.0 / (q * q);
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("p must lie in (0,1), got {p}"));
    }
    if (m as f64) < floor {
        return domain(format!("m = {m} is below p^-2(1-p)^-2 = {floor:.4}"));
    }
    if 2 * m > n {
        return domain(format!("m = {m} exceeds n/2 = {}", n as f64 / 2.0));
    }
    let part = make_partition(n, m, seed)?;
    let a_size = part.a_size();
    let threshold = a_size as f64 / 128.0;
    let abs_window = AlphaWindow::proof(p, m);
    let signed_window = AlphaWindow::lemma(p, m);

    let per_trial = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<(TrialRow, f64, Option<Vec<f64>>)> {
            let mut s0 = GnpSampler::new(n, p)?;
            let mut s1 = GnpSampler::new(n, p)?;
            let g0 = s0.draw(&mut rng::stream(seed, 2 * i)).clone();
            let g1 = s1.draw(&mut rng::stream(seed, 2 * i + 1));
            let prof = profile_from(&g0, g1, &part, p, abs_window);
            let signed = prof.alphas.iter().filter(|&&a| signed_window.contains(a)).count();
            let sq: f64 = prof.alphas.iter().map(|&a| f64::from(a * a)).sum();
            let keep = (i == 0).then(|| prof.alphas.iter().map(|&a| f64::from(a * a)).collect());
            let row = TrialRow {
                trial: i,
                m,
                a_size,
                a_prime: prof.a_prime.len(),
                a_prime_signed: signed,
                ratio: prof.a_prime.len() as f64 / a_size as f64,
                pass: prof.a_prime.len() as f64 >= threshold,
            };
            Ok((row, sq / a_size as f64, keep))
        })
        .collect::<Result<Vec<_>>>()?;

    let t = trials.max(1) as f64;
    let rows: Vec<TrialRow> = per_trial.iter().map(|x| x.0).collect();
    let mean_sq: Vec<f64> = per_trial.iter().map(|x| x.1).collect();
    let emp = mean_sq.iter().sum::<f64>() / t;
    let emp_var = mean_sq.iter().map(|x| (x - emp).powi(2)).sum::<f64>() / (t - 1.0).max(1.0);
    Ok(TypicalAlphaReport {
        n,
        m,
        p,
        trials,
        threshold,
        window_absolute: abs_window,
        window_signed: signed_window,
        frequency: rows.iter().filter(|r| r.pass).count() as f64 / t,
        frequency_signed: rows.iter().filter(|r| r.a_prime_signed as f64 >= threshold).count() as f64 / t,
        ratio_min: rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min),
        ratio_mean: rows.iter().map(|r| r.ratio).sum::<f64>() / t,
        ratio_max: rows.iter().map(|r| r.ratio).fold(0.0, f64::max),
        expected_alpha_sq: expected_alpha_sq(p, m),
        empirical_alpha_sq: emp,
        empirical_alpha_sq_se: (emp_var / t).sqrt(),
        first_trial_alpha_sq: per_trial.into_iter().find_map(|x| x.2).unwrap_or_default(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleVertexReport {
    pub n: usize,
    pub p: f64,
    pub trials: u64,
    /// `(pn)²/2⁴`
    pub threshold: f64,
    /// Fraction of trials with `|A′| ≥ (pn)²/2⁴`, `A′ = {f : |α_f| = 1}`.
    pub frequency: f64,
    /// `1 − exp(−pn/2⁴)`
    pub predicted_frequency: f64,
    pub symdiff_mean: f64,
    pub symdiff_se: f64,
    /// `(n−1)·2p(1−p)`
    pub symdiff_expected_mean: f64,
    /// Total variation between the empirical law of `|N⁰(w) Δ N¹(w)|` and
    /// `Bin(n−1, 2p(1−p))`.
    pub symdiff_tv: f64,
    pub rows: Vec<TrialRow>,
}

/// `P3 = {w}`: counts pairs with `|α_f| = 1` and the size of the symmetric
/// difference of the two neighbourhoods of `w`.
pub fn single_vertex_trial(n: usize, p: f64, trials: u64, seed: u64) -> Result<SingleVertexReport> {
    if !(p > 0.0 && p < 0.5) {
        return domain(format!("single-vertex trial needs p in (0, 1/2), got {p}"));
    }
    let part = make_partition(n, 1, seed)?;
    let w = part.p3[0];
    let a_size = part.a_size();
    let threshold = (p * n as f64).powi(2) / 16.0;
    let window = AlphaWindow::unit();

    let per_trial = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<(TrialRow, usize)> {
            let mut s0 = GnpSampler::new(n, p)?;
            let mut s1 = GnpSampler::new(n, p)?;
            let g0 = s0.draw(&mut rng::stream(seed, 2 * i)).clone();
            let g1 = s1.draw(&mut rng::stream(seed, 2 * i + 1));
            let prof = profile_from(&g0, g1, &part, p, window);
            let sym = g0.row(w).iter().zip(g1.row(w)).map(|(a, b)| (a ^ b).count_ones() as usize).sum();
            let row = TrialRow {
                trial: i,
                m: 1,
                a_size,
                a_prime: prof.a_prime.len(),
                a_prime_signed: prof.alphas.iter().filter(|&&a| a == 1).count(),
                ratio: prof.a_prime.len() as f64 / a_size as f64,
                pass: prof.a_prime.len() as f64 >= threshold,
            };
            Ok((row, sym))
        })
        .collect::<Result<Vec<_>>>()?;

    let t = trials.max(1) as f64;
    let sizes: Vec<usize> = per_trial.iter().map(|x| x.1).collect();
    let mean = sizes.iter().sum::<usize>() as f64 / t;
    let var = sizes.iter().map(|&s| (s as f64 - mean).powi(2)).sum::<f64>() / (t - 1.0).max(1.0);
    let q = 2.0 * p * (1.0 - p);
    let bin = crate::toolbox::binomial_pmf((n - 1) as u64, q);
    let mut hist = vec![0u64; n];
    sizes.iter().for_each(|&s| hist[s] += 1);
    let tv = 0.5 * bin.iter().zip(&hist).map(|(b, &h)| (b - h as f64 / t).abs()).sum::<f64>();
    let rows: Vec<TrialRow> = per_trial.into_iter().map(|x| x.0).collect();
    Ok(SingleVertexReport {
        n,
        p,
        trials,
        threshold,
        frequency: rows.iter().filter(|r| r.pass).count() as f64 / t,
        predicted_frequency: 1.0 - (-p * n as f64 / 16.0).exp(),
        symdiff_mean: mean,
        symdiff_se: (var / t).sqrt(),
        symdiff_expected_mean: (n - 1) as f64 * q,
        symdiff_tv: tv,
        rows,
    })
}

/// `e^{itα/σ}` summed over `x_A⁰` outcomes by brute force, for checking the
/// closed-form product on tiny partitions.
pub fn inner_charfn_brute(alphas: &[i32], p: f64, t: f64, sigma: f64) -> Complex64 {
    let k = alphas.len();
    assert!(k <= 20, "brute force over 2^{k} outcomes");
    (0u32..1 << k)
        .map(|mask| {
            let ones = mask.count_ones() as i32;
            let w = p.powi(ones) * (1.0 - p).powi(k as i32 - ones);
            let s: i64 = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| i64::from(alphas[i])).sum();
            Complex64::from_polar(w, t * s as f64 / sigma)
        })
        .sum()
}
