//! Lattice Fourier inversion and the distances between the law of the
//! triangle count and the Gaussian.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{moments, GnpSampler, Moments};
use crate::oracle::{exact_pmf, TriangleEdgeTable};
use crate::rng::{map_chunks, split_fixed};
use crate::scalar::binomial;

pub const MIN_PMF_SAMPLES: u64 = 10_000;
/// Half-width, in standard deviations, of the Gaussian comparison window.
pub const GAUSSIAN_WINDOW: f64 = 10.0;
pub const DEFAULT_EPSILON: f64 = 0.1;
const MC_CHUNK: u64 = 1 << 14;
const INVERSION_TOL: f64 = 1e-13;
const MAX_PANELS: usize = 1 << 22;
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PmfSource {
    ExactOracle,
    MonteCarlo,
    Inversion,
}

impl fmt::Display for PmfSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PmfSource::ExactOracle => "exact-oracle",
            PmfSource::MonteCarlo => "monte-carlo",
            PmfSource::Inversion => "inversion",
        })
    }
}

/// Law of the triangle count on the contiguous range `k_min..k_min + len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    pub n: u64,
    pub p: f64,
    pub k_min: u64,
    pub probs: Vec<f64>,
    pub source: PmfSource,
    /// Per-k 95% radius (Monte Carlo only).
    pub ci: Option<Vec<f64>>,
    /// Total negative mass removed by clipping (inversion only).
    pub clipped: f64,
    pub samples: u64,
}

impl Pmf {
    pub fn from_exact(table: &TriangleEdgeTable, p: f64) -> Self {
        Self {
            n: table.n() as u64,
            p,
            k_min: 0,
            probs: exact_pmf(table, p),
            source: PmfSource::ExactOracle,
            ci: None,
            clipped: 0.0,
            samples: 0,
        }
    }

    pub fn k_max(&self) -> u64 {
        self.k_min + self.probs.len() as u64 - 1
    }

    pub fn support(&self) -> RangeInclusive<u64> {
        self.k_min..=self.k_max()
    }

    pub fn prob(&self, k: u64) -> f64 {
        if k < self.k_min {
            return 0.0;
        }
        self.probs.get((k - self.k_min) as usize).copied().unwrap_or(0.0)
    }

    pub fn ci_at(&self, k: u64) -> f64 {
        match &self.ci {
            Some(ci) if k >= self.k_min => ci.get((k - self.k_min) as usize).copied().unwrap_or(0.0),
            _ => 0.0,
        }
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn max_prob(&self) -> f64 {
        self.probs.iter().copied().fold(0.0, f64::max)
    }

    /// `½ Σ ci_k`, the radius matching a total-variation distance.
    pub fn aggregate_ci(&self) -> f64 {
        self.ci.as_ref().map_or(0.0, |c| 0.5 * c.iter().sum::<f64>())
    }

    pub fn tv_distance(&self, other: &Pmf) -> f64 {
        let lo = self.k_min.min(other.k_min);
        let hi = self.k_max().max(other.k_max());
        0.5 * (lo..=hi).map(|k| (self.prob(k) - other.prob(k)).abs()).sum::<f64>()
    }

    pub fn validate(&self) -> Result<()> {
        if self.probs.is_empty() {
            return invalid("empty pmf");
        }
        if self.probs.iter().any(|&q| !(q >= 0.0)) {
            return invalid("negative or NaN mass");
        }
        let top = binomial(self.n, 3);
        if u128::from(self.k_max()) > top {
            return invalid(format!("support reaches {} beyond C(n,3) = {top}", self.k_max()));
        }
        let total = self.total();
        if self.source != PmfSource::MonteCarlo && (total - 1.0).abs() > 1e-9 {
            return invalid(format!("total mass {total} differs from 1"));
        }
        Ok(())
    }
}

fn max_count(n: u64) -> Result<u64> {
    u64::try_from(binomial(n, 3)).map_err(|_| Error::ResourceLimit(format!("C({n},3) overflows")))
}

/// `P(X = k) = (1/2π)∫_{−π}^{π} φ_X(θ)e^{−iθk} dθ` by the trapezoid rule on
/// `N` equispaced nodes, `N` a power of two above `C(n,3)` so that no two
/// support points alias. `N` is doubled until successive answers agree to
/// 1e-13; negative masses are clipped to zero.
pub fn invert_charfn<F>(charfn: F, n: u64, p: f64, k_range: RangeInclusive<u64>) -> Result<Pmf>
where
    F: Fn(f64) -> Complex64,
{
    let top = max_count(n)?;
    let (lo, hi) = (*k_range.start(), *k_range.end());
    if lo > hi || hi > top {
        return invalid(format!("k range {lo}..={hi} outside 0..={top}"));
    }
    let mut panels = ((top + 1).next_power_of_two() as usize).max(16);
    let mut prev = trapezoid(&charfn, panels, lo, hi);
    loop {
        if panels * 2 > MAX_PANELS {
            return Err(Error::Numeric(format!("inversion did not settle by {panels} panels")));
        }
        panels *= 2;
        let next = trapezoid(&charfn, panels, lo, hi);
        let change = prev.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prev = next;
        if change < INVERSION_TOL {
            break;
        }
        if !change.is_finite() {
            return Err(Error::Numeric(format!("non-finite change at {panels} panels")));
        }
    }
    let mut clipped = 0.0;
    for q in &mut prev {
        if *q < 0.0 {
            clipped -= *q;
            *q = 0.0;
        }
    }
    Ok(Pmf { n, p, k_min: lo, probs: prev, source: PmfSource::Inversion, ci: None, clipped, samples: 0 })
}

fn trapezoid<F: Fn(f64) -> Complex64>(charfn: &F, panels: usize, lo: u64, hi: u64) -> Vec<f64> {
    let h = 2.0 * PI / panels as f64;
    let values: Vec<Complex64> = (0..panels).map(|j| charfn(-PI + h * j as f64)).collect();
    (lo..=hi)
        .map(|k| {
            let s: Complex64 = values
                .iter()
                .enumerate()
                .map(|(j, v)| v * Complex64::from_polar(1.0, -(-PI + h * j as f64) * k as f64))
                .sum();
            s.re / panels as f64
        })
        .collect()
}

/// Empirical law of `X` from `num_samples` draws, on the range
/// `μ ± 10σ` widened to every observed count and clamped to `[0, C(n,3)]`.
/// Radii are `1.96·√(p̂(1−p̂)/N)`, floored at `1/N`.
pub fn mc_pmf(n: u64, p: f64, num_samples: u64, seed: u64) -> Result<Pmf> {
    if num_samples < MIN_PMF_SAMPLES {
        return invalid(format!("need at least {MIN_PMF_SAMPLES} samples, got {num_samples}"));
    }
    let m = moments(n, p)?;
    let top = max_count(n)?;
    let chunks = split_fixed(num_samples, MC_CHUNK);
    let parts = map_chunks(seed, &chunks, |chunk, rng| -> Result<BTreeMap<u64, u64>> {
        let mut sampler = GnpSampler::new(n as usize, p)?;
        let mut hist = BTreeMap::new();
        for _ in 0..chunk.len {
            *hist.entry(sampler.draw_count(rng)).or_insert(0u64) += 1;
        }
        Ok(hist)
    });
    let mut hist = BTreeMap::new();
    for part in parts {
        for (k, c) in part? {
            *hist.entry(k).or_insert(0u64) += c;
        }
    }
    let (lo, hi) = gaussian_range(&m, top);
    let lo = lo.min(*hist.keys().next().unwrap_or(&lo));
    let hi = hi.max(*hist.keys().next_back().unwrap_or(&hi));
    let total = num_samples as f64;
    let probs: Vec<f64> = (lo..=hi).map(|k| *hist.get(&k).unwrap_or(&0) as f64 / total).collect();
    let ci = probs.iter().map(|&q| (1.96 * (q * (1.0 - q) / total).sqrt()).max(1.0 / total)).collect();
    Ok(Pmf {
        n,
        p,
        k_min: lo,
        probs,
        source: PmfSource::MonteCarlo,
        ci: Some(ci),
        clipped: 0.0,
        samples: num_samples,
    })
}

/// Integers `k ∈ [0, top]` with `|k − μ| ≤ 10σ`.
pub fn gaussian_range(m: &Moments<f64>, top: u64) -> (u64, u64) {
    let s = m.sigma();
    let lo = (m.mu - GAUSSIAN_WINDOW * s).ceil().max(0.0) as u64;
    let hi = ((m.mu + GAUSSIAN_WINDOW * s).floor().max(0.0) as u64).min(top);
    (lo.min(hi), hi)
}

/// `N(x) = e^{−x²/2}/√(2π)`
pub fn normal_density(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

fn check_coverage(pmf: &Pmf, m: &Moments<f64>) -> Result<()> {
    let (lo, hi) = gaussian_range(m, max_count(pmf.n)?);
    if pmf.k_min > lo || pmf.k_max() < hi {
        return Err(Error::Coverage(format!(
            "pmf covers {}..={} but |x| <= 10 needs {lo}..={hi}",
            pmf.k_min,
            pmf.k_max()
        )));
    }
    Ok(())
}

/// Where the sup-lattice distance is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupLattice {
    pub value: f64,
    pub argmax_k: u64,
    /// `σ·ci` at the maximizer.
    pub ci: f64,
}

pub fn sup_lattice_detail(pmf: &Pmf, m: &Moments<f64>) -> Result<SupLattice> {
    check_coverage(pmf, m)?;
    let s = m.sigma();
    let mut best = SupLattice { value: 0.0, argmax_k: pmf.k_min, ci: 0.0 };
    for (i, &q) in pmf.probs.iter().enumerate() {
        let k = pmf.k_min + i as u64;
        let d = (normal_density((k as f64 - m.mu) / s) - s * q).abs();
        if d > best.value {
            best = SupLattice { value: d, argmax_k: k, ci: s * pmf.ci_at(k) };
        }
    }
    Ok(best)
}

/// `sup_x |N(x) − σ·P(X* = x)|` over lattice points of the covered range.
pub fn sup_lattice_distance(pmf: &Pmf, m: &Moments<f64>) -> Result<f64> {
    Ok(sup_lattice_detail(pmf, m)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L1Parts {
    /// `Σ_k |N((k−μ)/σ)/σ − P(X = k)|` over the covered range.
    pub within: f64,
    /// `Σ_k N((k−μ)/σ)/σ` over integers `k ≥ 0` outside it.
    pub outside: f64,
}

impl L1Parts {
    pub fn total(&self) -> f64 {
        self.within + self.outside
    }
}

pub fn l1_parts(pmf: &Pmf, m: &Moments<f64>) -> Result<L1Parts> {
    check_coverage(pmf, m)?;
    let s = m.sigma();
    let g = |k: u64| normal_density((k as f64 - m.mu) / s) / s;
    let within = pmf.probs.iter().enumerate().map(|(i, &q)| (g(pmf.k_min + i as u64) - q).abs()).sum();
    // both tails decrease away from the covered range, which contains μ's
    // neighbourhood; stop once terms vanish
    let mut outside = 0.0;
    for k in (0..pmf.k_min).rev() {
        let term = g(k);
        outside += term;
        if term < 1e-300 || term < outside * 1e-18 {
            break;
        }
    }
    let mut k = pmf.k_max() + 1;
    loop {
        let term = g(k);
        outside += term;
        if term < 1e-300 || term < outside * 1e-18 || k == u64::MAX {
            break;
        }
        k += 1;
    }
    Ok(L1Parts { within, outside })
}

/// `Σ_{k ∈ N} |N((k−μ)/σ)/σ − P(X = k)|`
pub fn l1_distance(pmf: &Pmf, m: &Moments<f64>) -> Result<f64> {
    Ok(l1_parts(pmf, m)?.total())
}

/// `σ·max_k P(X = k)`
pub fn anticoncentration_stat(pmf: &Pmf, m: &Moments<f64>) -> f64 {
    m.sigma() * pmf.max_prob()
}

/// `n^{−1/2+ε}·p^{1/2}`
pub fn predicted_bound(n: u64, p: f64, epsilon: f64) -> f64 {
    (n as f64).powf(epsilon - 0.5) * p.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub n: u64,
    pub p: f64,
    pub epsilon: f64,
    pub sup_lattice: f64,
    pub l1: f64,
    pub anticoncentration: f64,
    pub predicted_bound: f64,
    pub source: PmfSource,
    pub samples: u64,
}

pub fn distance_report(pmf: &Pmf, epsilon: f64) -> Result<DistanceReport> {
    pmf.validate()?;
    let m = moments(pmf.n, pmf.p)?;
    if m.sigma2 <= 0.0 {
        return Err(Error::Degenerate(format!("zero variance at n = {}, p = {}", pmf.n, pmf.p)));
    }
    Ok(DistanceReport {
        n: pmf.n,
        p: pmf.p,
        epsilon,
        sup_lattice: sup_lattice_distance(pmf, &m)?,
        l1: l1_distance(pmf, &m)?,
        anticoncentration: anticoncentration_stat(pmf, &m),
        predicted_bound: predicted_bound(pmf.n, pmf.p, epsilon),
        source: pmf.source,
        samples: pmf.samples,
    })
}
