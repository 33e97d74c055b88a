//! Characteristic function of the standardized triangle count: Monte Carlo
//! estimation, the three t-regimes and their bounds, and the covering of
//! the middle regime by the intervals `I_m`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Error, Result};
use crate::graph::{moments, GnpSampler, Moments};
use crate::oracle::{charfn_of_pmf, exact_pmf, TriangleEdgeTable};
use crate::rng::{map_chunks, split_even};

/// Batches used for the batch-means confidence radius.
pub const CHARFN_BATCHES: u64 = 30;
pub const MIN_CHARFN_SAMPLES: u64 = 1_000;
/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Estimates of `E e^{itX*}` on a grid of `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharFnSeries {
    pub n: u64,
    pub p: f64,
    pub t_grid: Vec<f64>,
    pub estimates: Vec<Complex64>,
    /// 95% radius around each estimate (bounds the error of the modulus).
    pub ci_radius: Vec<f64>,
    pub samples_used: u64,
}

impl CharFnSeries {
    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }

    pub fn modulus(&self, i: usize) -> f64 {
        self.estimates[i].norm()
    }
}

fn sorted_grid(t_grid: &[f64]) -> Result<Vec<f64>> {
    if t_grid.is_empty() {
        return invalid("empty t grid");
    }
    if t_grid.iter().any(|t| !t.is_finite()) {
        return invalid("t grid contains a non-finite value");
    }
    let mut grid = t_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    Ok(grid)
}

/// Monte Carlo estimate of `E e^{itX*}` for every `t` in `t_grid` (sorted
/// ascending in the output). Samples are split into 30 batches, each with
/// its own stream; negative `t` reuse the `|t|` sums with the sine negated,
/// so `±t` are exact conjugates.
pub fn estimate_charfn(n: u64, p: f64, t_grid: &[f64], num_samples: u64, seed: u64) -> Result<CharFnSeries> {
    let grid = sorted_grid(t_grid)?;
    if num_samples < MIN_CHARFN_SAMPLES {
        return invalid(format!("need at least {MIN_CHARFN_SAMPLES} samples, got {num_samples}"));
    }
    let m = moments(n, p)?;
    let sigma = m.sigma();
    let chunks = split_even(num_samples, CHARFN_BATCHES);
    let histograms = map_chunks(seed, &chunks, |chunk, rng| -> Result<BTreeMap<u64, u64>> {
        let mut sampler = GnpSampler::new(n as usize, p)?;
        let mut hist = BTreeMap::new();
        for _ in 0..chunk.len {
            *hist.entry(sampler.draw_count(rng)).or_insert(0u64) += 1;
        }
        Ok(hist)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut estimates = Vec::with_capacity(grid.len());
    let mut radii = Vec::with_capacity(grid.len());
    for &t in &grid {
        let a = t.abs();
        let mut total = Complex64::new(0.0, 0.0);
        let mut batch_means = Vec::with_capacity(histograms.len());
        for (hist, chunk) in histograms.iter().zip(&chunks) {
            let mut s = Complex64::new(0.0, 0.0);
            for (&k, &c) in hist {
                let x = (k as f64 - m.mu) / sigma;
                let (sin, cos) = (a * x).sin_cos();
                s += Complex64::new(cos, sin) * c as f64;
            }
            total += s;
            batch_means.push(s / chunk.len as f64);
        }
        let mut est = total / num_samples as f64;
        if t < 0.0 {
            est = est.conj();
        }
        estimates.push(est);
        radii.push(batch_radius(&batch_means));
    }
    Ok(CharFnSeries { n, p, t_grid: grid, estimates, ci_radius: radii, samples_used: num_samples })
}

/// `Z95 · sd(batch means)/√B`, a disc radius in the complex plane.
fn batch_radius(means: &[Complex64]) -> f64 {
    let b = means.len() as f64;
    if means.len() < 2 {
        return 0.0;
    }
    let centre = means.iter().sum::<Complex64>() / b;
    let var = means.iter().map(|z| (z - centre).norm_sqr()).sum::<f64>() / (b - 1.0);
    Z95 * (var / b).sqrt()
}

/// `E e^{itX*} = e^{−itμ/σ}·φ_X(t/σ)` from the exact law.
pub fn exact_standardized_charfn(pmf: &[f64], m: &Moments<f64>, t: f64) -> Complex64 {
    let sigma = m.sigma();
    Complex64::from_polar(1.0, -t * m.mu / sigma) * charfn_of_pmf(pmf, t / sigma)
}

/// Oracle series with zero confidence radius.
pub fn exact_series(table: &TriangleEdgeTable, p: f64, t_grid: &[f64]) -> Result<CharFnSeries> {
    let grid = sorted_grid(t_grid)?;
    let n = table.n() as u64;
    let m = moments(n, p)?;
    let pmf = exact_pmf(table, p);
    let estimates = grid.iter().map(|&t| exact_standardized_charfn(&pmf, &m, t)).collect();
    Ok(CharFnSeries { n, p, ci_radius: vec![0.0; grid.len()], t_grid: grid, estimates, samples_used: 0 })
}

/// Sup of `|φ_{X*}(t) − e^{−t²/2}|` over gridded `|t| ≤ K`, next to the
/// predictor `c·K/(n·p^{1/2})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteinReport {
    pub k: f64,
    pub discrepancy: f64,
    pub argmax_t: f64,
    /// Confidence radius at the maximizing point.
    pub ci: f64,
    pub predictor: f64,
    pub constant: f64,
    pub ratio: f64,
}

pub fn stein_discrepancy(n: u64, p: f64, k: f64, series: &CharFnSeries, constant: f64) -> Result<SteinReport> {
    if !(k >= 0.0) {
        return invalid(format!("K must be nonnegative, got {k}"));
    }
    let reach = series.t_grid.iter().fold(0.0f64, |acc, t| acc.max(t.abs()));
    if reach < k * (1.0 - 1e-12) {
        return Err(Error::Coverage(format!("grid reaches |t| = {reach}, below K = {k}")));
    }
    let mut best = (0.0, 0.0, 0.0);
    for i in 0..series.len() {
        let t = series.t_grid[i];
        if t.abs() > k * (1.0 + 1e-12) {
            continue;
        }
        let gauss = (-0.5 * t * t).exp();
        let d = (series.estimates[i] - gauss).norm();
        if d > best.0 {
            best = (d, t, series.ci_radius[i]);
        }
    }
    let predictor = constant * k / (n as f64 * p.sqrt());
    Ok(SteinReport {
        k,
        discrepancy: best.0,
        argmax_t: best.1,
        ci: best.2,
        predictor,
        constant,
        ratio: if predictor > 0.0 { best.0 / predictor } else { f64::INFINITY },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Stein,
    Mid,
    Edge,
    Uncovered,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Stein => "stein",
            Regime::Mid => "mid",
            Regime::Edge => "edge",
            Regime::Uncovered => "uncovered",
        })
    }
}

/// User parameters of the regime bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    pub gamma: f64,
    pub k: f64,
    pub c_edge: f64,
}

impl RegimeParams {
    pub fn new(gamma: f64, k: f64, c_edge: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if !(k >= 0.0) || !k.is_finite() {
            return invalid(format!("K must be finite and nonnegative, got {k}"));
        }
        if !(c_edge > 0.0) {
            return invalid(format!("c_edge must be positive, got {c_edge}"));
        }
        Ok(Self { gamma, k, c_edge })
    }
}

pub fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 0.125) {
        return invalid(format!("gamma must lie in (0, 1/8), got {gamma}"));
    }
    Ok(())
}

/// `δ` with `1/2 + γ = 1/(2 − δ)`.
pub fn delta_from_gamma(gamma: f64) -> f64 {
    2.0 - 1.0 / (0.5 + gamma)
}

/// `K = (ln n)^{8/γ} (p²n)^{1/2+γ}`.
pub fn default_k(n: u64, p: f64, gamma: f64) -> f64 {
    let n = n as f64;
    n.ln().powf(8.0 / gamma) * (p * p * n).powf(0.5 + gamma)
}

/// Regime endpoints for one `(n, p)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeBounds {
    pub n: u64,
    pub p: f64,
    pub sigma: f64,
    pub params: RegimeParams,
    /// `(2²¹p²n)^{1/2+γ}`
    pub mid_lo: f64,
    /// `σ/2¹⁰`
    pub mid_hi: f64,
    /// `σ/2¹²`
    pub edge_lo: f64,
    /// `πσ`
    pub edge_hi: f64,
    /// `p ∈ (4n^{-1/2}, 1/2)`
    pub mid_applies: bool,
    /// `p ∈ (n^{-1/2}, 1/2)`
    pub edge_applies: bool,
}

impl RegimeBounds {
    pub fn new(n: u64, p: f64, params: RegimeParams) -> Result<Self> {
        let sigma = moments(n, p)?.sigma();
        let nf = n as f64;
        let root = nf.sqrt();
        Ok(Self {
            n,
            p,
            sigma,
            params,
            mid_lo: (2f64.powi(21) * p * p * nf).powf(0.5 + params.gamma),
            mid_hi: sigma / 2f64.powi(10),
            edge_lo: sigma / 2f64.powi(12),
            edge_hi: PI * sigma,
            mid_applies: p > 4.0 / root && p < 0.5,
            edge_applies: p > 1.0 / root && p < 0.5,
        })
    }

    pub fn mid_nonempty(&self) -> bool {
        self.mid_applies && self.mid_lo < self.mid_hi
    }

    pub fn mid_bound(&self, t: f64) -> f64 {
        (-t.abs().powf(2.0 * self.params.gamma)).exp()
    }

    /// `exp(−c_edge·√n)`
    pub fn edge_bound(&self) -> f64 {
        (-self.params.c_edge * (self.n as f64).sqrt()).exp()
    }

    /// The explicit second term of the edge-regime argument, `exp(−pn/2⁶)`.
    pub fn edge_bound_explicit(&self) -> f64 {
        (-self.p * self.n as f64 / 64.0).exp()
    }

    pub fn memberships(&self, t: f64) -> Vec<Regime> {
        let a = t.abs();
        let mut out = Vec::new();
        if a <= self.params.k {
            out.push(Regime::Stein);
        }
        if self.mid_applies && a > self.mid_lo && a < self.mid_hi {
            out.push(Regime::Mid);
        }
        if self.edge_applies && a > self.edge_lo && a <= self.edge_hi {
            out.push(Regime::Edge);
        }
        out
    }

    pub fn classify(&self, t: f64) -> RegimeClassification {
        let memberships = self.memberships(t);
        let bound_of = |r: Regime| match r {
            Regime::Mid => Some(self.mid_bound(t)),
            Regime::Edge => Some(self.edge_bound()),
            _ => None,
        };
        let bounded = memberships
            .iter()
            .filter_map(|&r| bound_of(r).map(|b| (r, b)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        let (regime, bound_value) = match bounded {
            Some((r, b)) => (r, Some(b)),
            None if memberships.contains(&Regime::Stein) => (Regime::Stein, None),
            None => (Regime::Uncovered, None),
        };
        RegimeClassification { t, regime, bound_value, memberships, params: self.params }
    }

    /// Geometric grid on `(0, K]` and on `[K, πσ]` plus the regime
    /// boundaries themselves; `K` is capped at `πσ`, past which `E e^{itX*}`
    /// repeats.
    pub fn grid(&self, points_per_segment: usize) -> Vec<f64> {
        let top = self.edge_hi;
        let k = self.params.k.min(top);
        let mut grid = Vec::new();
        if k > 0.0 {
            grid.extend(geometric(k / 64.0, k, points_per_segment));
        }
        let start = if k > 0.0 { k } else { (top / 1e6).min(1.0) };
        if top > start {
            grid.extend(geometric(start, top, 2 * points_per_segment));
        }
        grid.extend([k, self.edge_lo, self.mid_hi, top]);
        if self.mid_nonempty() {
            grid.push(self.mid_lo * (1.0 + 1e-9));
        }
        grid.retain(|&t| t > 0.0 && t.is_finite());
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        grid
    }
}

fn geometric(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 || !(lo > 0.0) || !(hi > lo) {
        return vec![hi];
    }
    let ratio = (hi / lo).ln() / (points - 1) as f64;
    (0..points).map(|i| lo * (ratio * i as f64).exp()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeClassification {
    pub t: f64,
    pub regime: Regime,
    pub bound_value: Option<f64>,
    /// Every regime whose interval contains `|t|`; the chosen one has the
    /// smallest bound.
    pub memberships: Vec<Regime>,
    pub params: RegimeParams,
}

pub fn classify_regime(n: u64, p: f64, t: f64, gamma: f64, k: f64, c_edge: f64) -> Result<RegimeClassification> {
    let params = RegimeParams::new(gamma, k, c_edge)?;
    Ok(RegimeBounds::new(n, p, params)?.classify(t))
}

/// Result of sweeping the intervals
/// `I_m = ((2¹⁹p²n²/m)^{1/(2−δ)}, σ/(2⁸ p m^{1/2}))`, `m ∈ (4/p², n/2) ∩ Z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    pub n: u64,
    pub p: f64,
    pub gamma: f64,
    pub delta: f64,
    pub sigma: f64,
    pub m_min: u64,
    pub m_max: u64,
    pub empty_intervals: u64,
    /// Number of `m` with `I_m ∩ I_{m+1} = ∅`.
    pub failed_overlaps: u64,
    pub first_failure: Option<u64>,
    /// Largest `left(m)/right(m+1)`; overlaps all hold iff this is below 1.
    pub worst_overlap_ratio: f64,
    pub endpoints_decreasing: bool,
    /// `((2²¹p²n)^{1/2+γ}, σ/2¹⁰)`
    pub target_lo: f64,
    pub target_hi: f64,
    pub target_empty: bool,
    pub covered: bool,
    /// Right endpoint of `I_{⌊n/2⌋}`.
    pub right_end_at_half_n: f64,
    /// Left endpoint of `I_{⌈4/p²⌉}`.
    pub left_end_at_min_m: f64,
    /// `(t, m)` with `t ∈ I_m`, for sample points of the target.
    pub witnesses: Vec<(f64, Option<u64>)>,
}

impl CoverReport {
    pub fn overlaps_hold(&self) -> bool {
        self.failed_overlaps == 0
    }

    pub fn passed(&self) -> bool {
        self.overlaps_hold() && self.covered
    }
}

pub fn interval_cover_check(n: u64, p: f64, gamma: f64) -> Result<CoverReport> {
    check_gamma(gamma)?;
    let nf = n as f64;
    if !(p > 4.0 / nf.sqrt() && p < 0.5) {
        return domain(format!("p = {p} outside (4n^-1/2, 1/2) for n = {n}"));
    }
    let sigma = moments(n, p)?.sigma();
    let expo = 0.5 + gamma;
    let left = |m: f64| (2f64.powi(19) * p * p * nf * nf / m).powf(expo);
    let right = |m: f64| sigma / (2f64.powi(8) * p * m.sqrt());
    let m_min = (4.0 / (p * p)).floor() as u64 + 1;
    let m_max = n.div_ceil(2) - 1;
    if m_min > m_max {
        return domain(format!("empty m-range ({}, {}) for n = {n}, p = {p}", 4.0 / (p * p), nf / 2.0));
    }

    let mut empty = 0;
    let mut failed = 0;
    let mut first_failure = None;
    let mut worst = 0.0f64;
    let mut decreasing = true;
    // merged union of the I_m, built from large m (small left end) upward
    let mut segments: Vec<(f64, f64)> = Vec::new();
    let mut prev = (f64::INFINITY, f64::INFINITY);
    for m in m_min..=m_max {
        let (l, r) = (left(m as f64), right(m as f64));
        if l >= r {
            empty += 1;
        }
        if l > prev.0 || r > prev.1 {
            decreasing = false;
        }
        prev = (l, r);
        if m < m_max {
            let r_next = right((m + 1) as f64);
            worst = worst.max(l / r_next);
            if !(l < r_next) {
                failed += 1;
                first_failure.get_or_insert(m);
            }
        }
    }
    for m in (m_min..=m_max).rev() {
        let (l, r) = (left(m as f64), right(m as f64));
        if l >= r {
            continue;
        }
        match segments.last_mut() {
            Some(last) if l < last.1 => last.1 = last.1.max(r),
            _ => segments.push((l, r)),
        }
    }

    let target_lo = (2f64.powi(21) * p * p * nf).powf(expo);
    let target_hi = sigma / 2f64.powi(10);
    let target_empty = target_lo >= target_hi;
    let covered = target_empty || segments.iter().any(|&(a, b)| a <= target_lo && target_hi <= b);

    let witnesses = if target_empty {
        Vec::new()
    } else {
        geometric(target_lo, target_hi, 18)
            .into_iter()
            .skip(1)
            .take(16)
            .map(|t| {
                let m = (m_min..=m_max).find(|&m| left(m as f64) < t && t < right(m as f64));
                (t, m)
            })
            .collect()
    };

    Ok(CoverReport {
        n,
        p,
        gamma,
        delta: delta_from_gamma(gamma),
        sigma,
        m_min,
        m_max,
        empty_intervals: empty,
        failed_overlaps: failed,
        first_failure,
        worst_overlap_ratio: worst,
        endpoints_decreasing: decreasing,
        target_lo,
        target_hi,
        target_empty,
        covered,
        right_end_at_half_n: right((n / 2) as f64),
        left_end_at_min_m: left((4.0 / (p * p)).ceil()),
        witnesses,
    })
}
