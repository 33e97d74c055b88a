//! One runner per experiment kind. Each returns the CSV body, the summary
//! and any extra files; nothing here touches the output directory.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde_json::{json, Value};

use lclt_core::charfn::{
    default_k, delta_from_gamma, estimate_charfn, exact_series, interval_cover_check, stein_discrepancy,
    RegimeBounds, RegimeParams,
};
use lclt_core::decoupling::{
    exact_decoupling, single_vertex_trial, typical_alpha_trial, verify_decoupling, DecouplingCheck, TrialRow,
    MAX_EXACT_BITS,
};
use lclt_core::metrics::{distance_report, invert_charfn, l1_parts, mc_pmf, sup_lattice_detail, Pmf};
use lclt_core::rng::stream;
use lclt_core::toolbox::{
    gaussian_tail, gaussian_tail_quadrature, kimvu_bound, kimvu_variance_ratio, paley_zygmund_check,
    triangle_derivative_profile, verify_binomial_charfn_bound, verify_chernoff, DominationReport,
};
use lclt_core::{exact_charfn, moments, Error as CoreError, GnpSampler};

use crate::cache::load_cache;
use crate::error::Result;
use crate::manifest::{DecoupleMode, Kind, Manifest, PmfMethod};

pub const PMF_HEADER: &str = "n,p,k,prob,ci,source";
pub const CHARFN_HEADER: &str = "t,re,im,modulus,ci,regime,bound";
pub const DECOUPLE_HEADER: &str = "trial,m,|A|,|A'|,ratio,pass";
pub const DISTANCES_HEADER: &str = "n,p,epsilon,sup_lattice,l1,anticoncentration,predicted_bound,source,samples";
pub const VERIFY_HEADER: &str = "check,cases,violations,max_excess,pass";
pub const COVER_HEADER: &str =
    "n,p,gamma,m_min,m_max,failed_overlaps,first_failure,target_lo,target_hi,target_empty,covered,passed";

pub struct Artifacts {
    pub csv: String,
    pub summary: Value,
    /// Additional `(file name, contents)` pairs.
    pub extra: Vec<(String, String)>,
}

/// Shortest round-trip decimal; exponent form outside `[1e-4, 1e15)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn with_header(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

pub fn execute(m: &Manifest) -> Result<Artifacts> {
    match m.kind {
        Kind::Pmf => run_pmf(m),
        Kind::Charfn => run_charfn(m),
        Kind::Decoupling => run_decoupling(m),
        Kind::Distances => run_distances(m),
        Kind::ToolboxVerify => run_verify(m),
        Kind::CoverCheck => run_cover(m),
    }
}

fn ceiling(m: &Manifest) -> usize {
    m.ceiling.unwrap_or(lclt_core::oracle::DEFAULT_MAX_VERTICES)
}

/// The law of `X` for one cell, routed by method and the oracle ceiling.
fn obtain_pmf(m: &Manifest, n: u64, p: f64) -> Result<Pmf> {
    let cap = ceiling(m);
    let exact_ok = n as usize <= cap;
    let method = match m.method.unwrap_or(PmfMethod::Auto) {
        PmfMethod::Auto if exact_ok => PmfMethod::ExactOracle,
        PmfMethod::Auto => PmfMethod::MonteCarlo,
        other => other,
    };
    match method {
        PmfMethod::ExactOracle | PmfMethod::Inversion => {
            let (table, _) = load_cache(&m.cache_root(), n as usize, cap)?;
            if method == PmfMethod::ExactOracle {
                Ok(Pmf::from_exact(&table, p))
            } else {
                let top = table.max_triangles() as u64;
                Ok(invert_charfn(|t| exact_charfn(&table, p, t), n, p, 0..=top)?)
            }
        }
        _ => Ok(mc_pmf(n, p, m.samples.unwrap_or(1_000_000), m.seed)?),
    }
}

fn run_pmf(m: &Manifest) -> Result<Artifacts> {
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for (n, p) in m.cells() {
        let pmf = obtain_pmf(m, n, p)?;
        for k in pmf.support() {
            let ci = if pmf.ci.is_some() { fmt_f64(pmf.ci_at(k)) } else { String::new() };
            rows.push(format!("{n},{},{k},{},{ci},{}", fmt_f64(p), fmt_f64(pmf.prob(k)), pmf.source));
        }
        let mean: f64 = pmf.support().map(|k| k as f64 * pmf.prob(k)).sum();
        let var: f64 = pmf.support().map(|k| (k as f64 - mean).powi(2) * pmf.prob(k)).sum();
        let mo = moments(n, p)?;
        cells.push(json!({
            "n": n, "p": p, "source": pmf.source.to_string(), "samples": pmf.samples,
            "k_min": pmf.k_min, "k_max": pmf.k_max(), "total": pmf.total(), "clipped": pmf.clipped,
            "mean": mean, "variance": var, "mu": mo.mu, "sigma2": mo.sigma2,
        }));
    }
    let source = cells.first().map(|c| c["source"].clone()).unwrap_or(Value::Null);
    Ok(Artifacts {
        csv: with_header(PMF_HEADER, rows),
        summary: json!({ "kind": "pmf", "seed": m.seed, "source": source, "cells": cells }),
        extra: Vec::new(),
    })
}

fn run_charfn(m: &Manifest) -> Result<Artifacts> {
    let (n, p) = m.cells()[0];
    let gamma = m.gamma[0];
    let k = m.k.first().copied().unwrap_or_else(|| default_k(n, p, gamma));
    let params = RegimeParams::new(gamma, k, m.c_edge.unwrap_or(1.0))?;
    let bounds = RegimeBounds::new(n, p, params)?;
    let grid = if m.t.is_empty() { bounds.grid(m.points.unwrap_or(24)) } else { m.t.clone() };
    let exact = n as usize <= ceiling(m);
    let series = if exact {
        let (table, _) = load_cache(&m.cache_root(), n as usize, ceiling(m))?;
        exact_series(&table, p, &grid)?
    } else {
        estimate_charfn(n, p, &grid, m.samples.unwrap_or(100_000), m.seed)?
    };

    let mut rows = Vec::new();
    let mut mid = (0u64, 0u64, f64::NEG_INFINITY);
    let mut edge = (0u64, 0u64, f64::NEG_INFINITY);
    for i in 0..series.len() {
        let t = series.t_grid[i];
        let z = series.estimates[i];
        let ci = series.ci_radius[i];
        let c = bounds.classify(t);
        let bound = c.bound_value.map(fmt_f64).unwrap_or_default();
        rows.push(format!(
            "{},{},{},{},{},{},{bound}",
            fmt_f64(t),
            fmt_f64(z.re),
            fmt_f64(z.im),
            fmt_f64(z.norm()),
            fmt_f64(ci),
            c.regime
        ));
        let modulus = z.norm();
        for (r, tally, b) in [
            (lclt_core::charfn::Regime::Mid, &mut mid, bounds.mid_bound(t)),
            (lclt_core::charfn::Regime::Edge, &mut edge, bounds.edge_bound()),
        ] {
            if c.memberships.contains(&r) {
                tally.0 += 1;
                let excess = modulus - b - 3.0 * ci;
                tally.2 = tally.2.max(excess);
                if excess > 0.0 {
                    tally.1 += 1;
                }
            }
        }
    }
    let reach = series.t_grid.iter().fold(0.0f64, |a, t| a.max(t.abs()));
    let stein = stein_discrepancy(n, p, k.min(reach), &series, 1.0).ok();
    let tally = |t: (u64, u64, f64)| json!({ "points": t.0, "violations": t.1, "max_excess": finite(t.2) });
    Ok(Artifacts {
        csv: with_header(CHARFN_HEADER, rows),
        summary: json!({
            "kind": "charfn", "n": n, "p": p, "gamma": gamma, "delta": delta_from_gamma(gamma),
            "k": k, "c_edge": params.c_edge, "sigma": bounds.sigma, "mu": moments(n, p)?.mu,
            "seed": m.seed, "samples": series.samples_used,
            "source": if exact { "exact-oracle" } else { "monte-carlo" },
            "boundaries": {
                "k": k, "edge_lo": bounds.edge_lo, "mid_lo": bounds.mid_lo,
                "mid_hi": bounds.mid_hi, "edge_hi": bounds.edge_hi,
            },
            "mid_applies": bounds.mid_applies, "edge_applies": bounds.edge_applies,
            "mid_nonempty": bounds.mid_nonempty(),
            "edge_bound": bounds.edge_bound(), "edge_bound_explicit": bounds.edge_bound_explicit(),
            "mid_check": tally(mid), "edge_check": tally(edge),
            "stein": stein,
        }),
        extra: Vec::new(),
    })
}

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn trial_rows(rows: &[TrialRow]) -> Vec<String> {
    rows.iter()
        .map(|r| format!("{},{},{},{},{},{}", r.trial, r.m, r.a_size, r.a_prime, fmt_f64(r.ratio), r.pass))
        .collect()
}

fn run_decoupling(m: &Manifest) -> Result<Artifacts> {
    let (n, p) = m.cells()[0];
    let n = n as usize;
    let trials = m.trials.unwrap_or(1_000);
    let (rows, mut summary) = match m.mode.unwrap_or(DecoupleMode::Typical) {
        DecoupleMode::Typical => {
            let mut r = typical_alpha_trial(n, m.m[0], p, trials, m.seed)?;
            let rows = trial_rows(&r.rows);
            r.rows.clear();
            r.first_trial_alpha_sq.clear();
            (rows, json!({ "mode": "typical", "report": r }))
        }
        DecoupleMode::SingleVertex => {
            let mut r = single_vertex_trial(n, p, trials, m.seed)?;
            let rows = trial_rows(&r.rows);
            r.rows.clear();
            (rows, json!({ "mode": "single-vertex", "report": r }))
        }
    };
    if !m.t.is_empty() {
        let part_m = m.m.first().copied().unwrap_or(1);
        let b_bits = 2 * (n - part_m) * part_m;
        let checks: Vec<DecouplingCheck> = if n <= ceiling(m) && b_bits <= MAX_EXACT_BITS {
            exact_decoupling(n, part_m, p, &m.t, ceiling(m))?
        } else {
            verify_decoupling(n, part_m, p, &m.t, m.samples.unwrap_or(10_000), m.seed)?
        };
        summary["inequality"] = json!(checks);
    }
    summary["kind"] = json!("decoupling");
    summary["seed"] = json!(m.seed);
    Ok(Artifacts { csv: with_header(DECOUPLE_HEADER, rows), summary, extra: Vec::new() })
}

fn run_distances(m: &Manifest) -> Result<Artifacts> {
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut details = Vec::new();
    let mut extra = Vec::new();
    for (n, p) in m.cells() {
        let pmf = obtain_pmf(m, n, p)?;
        let mo = moments(n, p)?;
        let sup = sup_lattice_detail(&pmf, &mo)?;
        let l1 = l1_parts(&pmf, &mo)?;
        for &eps in &m.epsilon {
            let r = distance_report(&pmf, eps)?;
            rows.push(format!(
                "{n},{},{},{},{},{},{},{},{}",
                fmt_f64(p),
                fmt_f64(eps),
                fmt_f64(r.sup_lattice),
                fmt_f64(r.l1),
                fmt_f64(r.anticoncentration),
                fmt_f64(r.predicted_bound),
                r.source,
                r.samples
            ));
            extra.push((format!("report_{:03}.json", reports.len()), serde_json::to_string_pretty(&r).unwrap() + "\n"));
            reports.push(r);
        }
        details.push(json!({
            "n": n, "p": p, "sup_lattice_ci": sup.ci, "argmax_k": sup.argmax_k,
            "l1_within": l1.within, "l1_outside": l1.outside, "clipped": pmf.clipped,
        }));
    }
    let eps0 = m.epsilon.first().copied();
    let trend: Vec<f64> = reports.iter().filter(|r| Some(r.epsilon) == eps0).map(|r| r.sup_lattice).collect();
    let inversions = trend.windows(2).filter(|w| w[1] > w[0]).count();
    Ok(Artifacts {
        csv: with_header(DISTANCES_HEADER, rows),
        summary: json!({
            "kind": "distances", "seed": m.seed, "reports": reports, "details": details,
            "sup_lattice_inversions": inversions,
            "frac_1_sqrt_2pi": 1.0 / (2.0 * PI).sqrt(),
        }),
        extra,
    })
}

fn pz_report(measures: &[Vec<f64>], check: &str) -> Result<DominationReport> {
    let mut r = DominationReport {
        check: check.into(),
        cases: 0,
        violations: 0,
        max_excess: f64::NEG_INFINITY,
        tolerance: 1e-12,
    };
    for values in measures {
        for theta in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let pz = match paley_zygmund_check(values, theta) {
                Ok(pz) => pz,
                Err(CoreError::Degenerate(_)) => continue,
                Err(e) => return Err(e.into()),
            };
            r.cases += 1;
            r.max_excess = r.max_excess.max(pz.rhs - pz.lhs);
            if !pz.holds {
                r.violations += 1;
            }
        }
    }
    Ok(r)
}

/// Empirical measures for Paley–Zygmund: random powers of uniforms,
/// sampled triangle counts, and `α_f²` from one typical-α trial.
fn pz_measures(m: &Manifest) -> Result<Vec<Vec<f64>>> {
    use rand::Rng;
    let mut rng = stream(m.seed, 0);
    let mut out: Vec<Vec<f64>> = (0..100)
        .map(|i| (0..5 + i % 40).map(|_| rng.random::<f64>().powi(1 + (i % 4) as i32)).collect())
        .collect();
    let mut sampler = GnpSampler::new(20, 0.3)?;
    let mut rng = stream(m.seed, 1);
    out.push((0..10_000).map(|_| sampler.draw_count(&mut rng) as f64).collect());
    let (n, mm, p) = (m.n.first().map_or(400, |&n| n as usize), m.m.first().copied().unwrap_or(200), m.p.first().copied().unwrap_or(0.2));
    out.push(typical_alpha_trial(n, mm, p, 1, m.seed)?.first_trial_alpha_sq);
    Ok(out)
}

fn run_verify(m: &Manifest) -> Result<Artifacts> {
    let ps: Vec<f64> = (1..20).map(|i| f64::from(i) / 20.0).collect();
    let mut checks = vec![verify_binomial_charfn_bound(100, 100, 1e-15), verify_chernoff(30, &ps, 1e-15)];
    checks.push(pz_report(&pz_measures(m)?, "paley_zygmund")?);

    let mut tail = DominationReport {
        check: "gaussian_tail_chain".into(),
        cases: 0,
        violations: 0,
        max_excess: f64::NEG_INFINITY,
        tolerance: 1e-15,
    };
    let mut tail_rows = Vec::new();
    for i in 0..=80 {
        let k = 2.0 + 0.1 * f64::from(i);
        let integral = gaussian_tail_quadrature(k, 1e-13);
        let middle = gaussian_tail(k)?;
        let top = (-k).exp();
        for excess in [integral - middle, middle - top] {
            tail.cases += 1;
            tail.max_excess = tail.max_excess.max(excess);
            if excess > tail.tolerance {
                tail.violations += 1;
            }
        }
        tail_rows.push(json!({ "k": k, "integral": integral, "middle": middle, "exp_neg_k": top }));
    }
    checks.push(tail);

    let kimvu: Vec<Value> = [100u64, 1_000, 10_000, 100_000]
        .iter()
        .map(|&n| {
            let p = 4.0 / (n as f64).sqrt();
            let prof = triangle_derivative_profile(n, p)?;
            let kv = kimvu_bound(n, p, 3.0 * (n as f64).ln(), m.c3.unwrap_or(1.0))?;
            Ok(json!({
                "n": n, "p": p, "e": prof.e, "variance_ratio": kimvu_variance_ratio(n, p)?,
                "r": kv.r, "threshold": kv.threshold, "tail": kv.tail,
            }))
        })
        .collect::<std::result::Result<_, CoreError>>()?;

    let rows = checks.iter().map(|c| {
        format!("{},{},{},{},{}", c.check, c.cases, c.violations, fmt_f64(c.max_excess), c.passed())
    });
    Ok(Artifacts {
        csv: with_header(VERIFY_HEADER, rows.collect::<Vec<_>>()),
        summary: json!({
            "kind": "toolbox-verify", "seed": m.seed, "checks": checks,
            "all_passed": checks.iter().all(|c| c.passed()),
            "gaussian_tail": tail_rows, "kimvu": kimvu,
        }),
        extra: Vec::new(),
    })
}

fn run_cover(m: &Manifest) -> Result<Artifacts> {
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for (n, p) in m.cells() {
        for &gamma in &m.gamma {
            let mut r = interval_cover_check(n, p, gamma)?;
            let mut line = String::new();
            let _ = write!(
                line,
                "{n},{},{},{},{},{},{},{},{},{},{},{}",
                fmt_f64(p),
                fmt_f64(gamma),
                r.m_min,
                r.m_max,
                r.failed_overlaps,
                r.first_failure.map(|f| f.to_string()).unwrap_or_default(),
                fmt_f64(r.target_lo),
                fmt_f64(r.target_hi),
                r.target_empty,
                r.covered,
                r.passed()
            );
            rows.push(line);
            r.witnesses.truncate(64);
            reports.push(r);
        }
    }
    Ok(Artifacts {
        csv: with_header(COVER_HEADER, rows),
        summary: json!({
            "kind": "cover-check",
            "all_passed": reports.iter().all(|r| r.passed()),
            "reports": reports,
        }),
        extra: Vec::new(),
    })
}
