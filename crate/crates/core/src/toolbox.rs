//! Probabilistic inequalities used to bound characteristic functions and
//! tails, each paired with a numerical verifier.

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Error, Result};
use crate::graph::moments;
use crate::scalar::{binomial, Real};

/// Distance from `x` to the nearest integer, in `[0, 1/2]`.
pub fn nearest_int_dist<T: Real>(x: T) -> T {
    (x - x.round()).abs()
}

/// `1 − 8p(1−p)·‖t/2π‖²`, an upper bound on `|E e^{itB}|` for `B ~ Bernoulli(p)`.
pub fn binomial_charfn_bound<T: Real>(p: T, t: T) -> T {
    let two_pi = T::from(std::f64::consts::TAU).unwrap();
    let d = nearest_int_dist(t / two_pi);
    T::one() - T::from(8.0).unwrap() * p * (T::one() - p) * d * d
}

/// `|1 − p + p·e^{it}|` computed as `sqrt(1 − 2p(1−p)(1 − cos t))`.
pub fn bernoulli_charfn_modulus<T: Real>(p: T, t: T) -> T {
    let two = T::from(2.0).unwrap();
    (T::one() - two * p * (T::one() - p) * (T::one() - t.cos())).max(T::zero()).sqrt()
}

/// `2·exp(−t²/(2μ + t))` for a binomial with mean `μ`. At `μ = t = 0` the
/// bound is the vacuous value 2.
pub fn chernoff_bound<T: Real>(mean: T, t: T) -> Result<T> {
    if !(mean >= T::zero()) || !(t >= T::zero()) {
        return invalid(format!("chernoff needs mean >= 0 and t >= 0, got {mean:?}, {t:?}"));
    }
    let two = T::from(2.0).unwrap();
    let denom = two * mean + t;
    if denom == T::zero() {
        return Ok(two);
    }
    Ok(two * (-(t * t) / denom).exp())
}

/// Probability mass function of `Bin(n, p)` in double precision, with the
/// coefficients accumulated in log space.
pub fn binomial_pmf(n: u64, p: f64) -> Vec<f64> {
    if p <= 0.0 || p >= 1.0 {
        let mut point = vec![0.0; n as usize + 1];
        point[if p <= 0.0 { 0 } else { n as usize }] = 1.0;
        return point;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let mut log_c = 0.0;
    (0..=n)
        .map(|y| {
            if y > 0 {
                log_c += ((n - y + 1) as f64 / y as f64).ln();
            }
            (log_c + y as f64 * lp + (n - y) as f64 * lq).exp()
        })
        .collect()
}

/// Exact `P(|Y − np| ≥ t)` for `Y ~ Bin(n, p)`. Boundary points within
/// `1e-9` of the threshold are counted in, so rounding can only enlarge
/// the tail.
pub fn binomial_two_sided_tail(n: u64, p: f64, t: f64) -> f64 {
    let mean = n as f64 * p;
    binomial_pmf(n, p)
        .iter()
        .enumerate()
        .filter(|(y, _)| (*y as f64 - mean).abs() >= t - 1e-9)
        .map(|(_, w)| w)
        .sum()
}

/// Outcome of checking one inequality over a grid of cases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub check: String,
    pub cases: u64,
    pub violations: u64,
    /// Largest `lhs − bound` seen; negative when every case holds strictly.
    pub max_excess: f64,
    pub tolerance: f64,
}

impl DominationReport {
    fn new(check: &str, tolerance: f64) -> Self {
        Self { check: check.into(), cases: 0, violations: 0, max_excess: f64::NEG_INFINITY, tolerance }
    }

    fn record(&mut self, value: f64, bound: f64) {
        let excess = value - bound;
        self.cases += 1;
        self.max_excess = self.max_excess.max(excess);
        if excess > self.tolerance {
            self.violations += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.cases > 0
    }
}

/// Compares the Bernoulli charfn modulus with its bound on a
/// `p_points × t_points` grid over `p ∈ [0.01, 0.99]`, `t ∈ [−4π, 4π]`.
pub fn verify_binomial_charfn_bound(p_points: usize, t_points: usize, tolerance: f64) -> DominationReport {
    let mut report = DominationReport::new("bernoulli_charfn_bound", tolerance);
    let span = 4.0 * std::f64::consts::PI;
    for i in 0..p_points {
        let p = 0.01 + 0.98 * i as f64 / (p_points.max(2) - 1) as f64;
        for j in 0..t_points {
            let t = -span + 2.0 * span * j as f64 / (t_points.max(2) - 1) as f64;
            report.record(bernoulli_charfn_modulus(p, t), binomial_charfn_bound(p, t));
        }
    }
    report
}

/// Compares the Chernoff bound with exact binomial tails for every
/// `n ≤ n_max`, every `p` in `ps` and every integer `t ∈ [0, n]`.
pub fn verify_chernoff(n_max: u64, ps: &[f64], tolerance: f64) -> DominationReport {
    let mut report = DominationReport::new("chernoff", tolerance);
    for n in 1..=n_max {
        for &p in ps {
            for t in 0..=n {
                let t = t as f64;
                let bound = chernoff_bound(n as f64 * p, t).expect("nonnegative arguments");
                report.record(binomial_two_sided_tail(n, p, t), bound);
            }
        }
    }
    report
}

/// `E_j(X) = max_{|A| ≥ j} E(∂_A X)` of the triangle polynomial,
/// `j = 0..=3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeProfile {
    pub n: u64,
    pub p: f64,
    pub e: [f64; 4],
}

/// Derivative sets with a nonzero derivative come in four shapes: empty
/// (`C(n,3)p³`), one edge (`(n−2)p²`), two edges sharing a vertex (`p`) and
/// a whole triangle (`1`). Larger or other sets differentiate to zero.
pub fn triangle_derivative_profile(n: u64, p: f64) -> Result<DerivativeProfile> {
    if n < 3 {
        return invalid(format!("derivative profile needs n >= 3, got {n}"));
    }
    let full = binomial(n, 3) as f64 * p.powi(3);
    let edge = (n - 2) as f64 * p * p;
    let cherry = p;
    let triangle = 1.0;
    let e3 = triangle;
    let e2 = cherry.max(e3);
    let e1 = edge.max(e2);
    let e0 = full.max(e1);
    Ok(DerivativeProfile { n, p, e: [e0, e1, e2, e3] })
}

/// Kim–Vu for the degree-3 triangle polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KimVuBound {
    pub r: f64,
    pub c3: f64,
    pub e0: f64,
    pub e1: f64,
    /// `c₃ r³ (E₀E₁)^{1/2}`
    pub threshold: f64,
    /// `exp(−r + 2 ln n)`
    pub tail: f64,
}

pub fn kimvu_bound(n: u64, p: f64, r: f64, c3: f64) -> Result<KimVuBound> {
    if !(r > 1.0) {
        return invalid(format!("Kim-Vu needs r > 1, got {r}"));
    }
    let prof = triangle_derivative_profile(n, p)?;
    let [e0, e1, ..] = prof.e;
    Ok(KimVuBound {
        r,
        c3,
        e0,
        e1,
        threshold: c3 * r.powi(3) * (e0 * e1).sqrt(),
        tail: (-r + 2.0 * (n as f64).ln()).exp(),
    })
}

/// `E₀E₁/σ²`; stays bounded when `p ≥ 4n^{-1/2}`.
pub fn kimvu_variance_ratio(n: u64, p: f64) -> Result<f64> {
    let prof = triangle_derivative_profile(n, p)?;
    let m = moments(n, p)?;
    Ok(prof.e[0] * prof.e[1] / m.sigma2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaleyZygmund {
    pub theta: f64,
    /// Empirical `P(S > θ E S)`.
    pub lhs: f64,
    /// `(1−θ)² (E S)² / E S²` under the empirical measure.
    pub rhs: f64,
    pub holds: bool,
}

/// Paley–Zygmund on the empirical measure of `values`, where it holds
/// exactly.
pub fn paley_zygmund_check(values: &[f64], theta: f64) -> Result<PaleyZygmund> {
    if !(theta > 0.0 && theta < 1.0) {
        return invalid(format!("theta must lie in (0,1), got {theta}"));
    }
    if values.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return invalid("Paley-Zygmund needs finite nonnegative values");
    }
    if !values.iter().any(|&v| v > 0.0) {
        return Err(Error::Degenerate("all sample values are zero".into()));
    }
    let len = values.len() as f64;
    let mean = values.iter().sum::<f64>() / len;
    let second = values.iter().map(|v| v * v).sum::<f64>() / len;
    let cut = theta * mean;
    let lhs = values.iter().filter(|&&v| v > cut).count() as f64 / len;
    let rhs = (1.0 - theta).powi(2) * mean * mean / second;
    Ok(PaleyZygmund { theta, lhs, rhs, holds: lhs + 1e-12 >= rhs })
}

/// `e^{−K²/2}/K`, the middle term of
/// `∫_K^∞ e^{−t²/2} dt ≤ e^{−K²/2}/K ≤ e^{−K}` (valid for `K ≥ 2`).
pub fn gaussian_tail<T: Real>(k: T) -> Result<T> {
    if !(k >= T::from(2.0).unwrap()) {
        return domain(format!("Gaussian tail chain needs K >= 2, got {k:?}"));
    }
    let half = T::from(0.5).unwrap();
    Ok((-half * k * k).exp() / k)
}

/// `∫_K^∞ e^{−t²/2} dt` by adaptive Simpson on unit panels covering
/// `[K, K + 40]`; the mass beyond is below `e^{−800}`. Each panel is
/// resolved to `tol` (floored at 1e-13) times the integrand at its left end.
pub fn gaussian_tail_quadrature(k: f64, tol: f64) -> f64 {
    let f = |t: f64| (-0.5 * t * t).exp();
    let tol = tol.max(1e-13);
    (0..40)
        .map(|i| {
            let a = k + f64::from(i);
            adaptive_simpson(&f, a, a + 1.0, tol * f(a.max(0.0)), 50)
        })
        .sum()
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, max_depth: u32) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, max_depth)
}
