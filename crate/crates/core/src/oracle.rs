//! Exhaustive enumeration of labeled graphs on a few vertices: the exact
//! joint law of (triangles, edges), from which the exact pmf, moments and
//! characteristic function of the triangle count follow as polynomials in p.

use std::fmt::Write as _;
use std::io::BufRead;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::scalar::{binomial, from_count, powi, Real, Scalar};

/// Default ceiling on `n`: 2^21 edge subsets at n = 7.
pub const DEFAULT_MAX_VERTICES: usize = 7;

/// Masks per parallel work item.
const MASK_CHUNK: u64 = 1 << 14;

/// `c[k][m]` = number of labeled graphs on `n` vertices with exactly `k`
/// triangles and `m` edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangleEdgeTable {
    n: usize,
    max_edges: usize,
    max_triangles: usize,
    counts: Vec<u64>,
}

impl TriangleEdgeTable {
    fn zeroed(n: usize) -> Self {
        let max_edges = n * n.saturating_sub(1) / 2;
        let max_triangles = binomial(n as u64, 3) as usize;
        Self { n, max_edges, max_triangles, counts: vec![0; (max_triangles + 1) * (max_edges + 1)] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_edges(&self) -> usize {
        self.max_edges
    }

    pub fn max_triangles(&self) -> usize {
        self.max_triangles
    }

    #[inline]
    pub fn count(&self, k: usize, m: usize) -> u64 {
        self.counts[k * (self.max_edges + 1) + m]
    }

    #[inline]
    fn count_mut(&mut self, k: usize, m: usize) -> &mut u64 {
        &mut self.counts[k * (self.max_edges + 1) + m]
    }

    /// Nonzero cells `(k, m, count)` in row-major order.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        (0..=self.max_triangles).flat_map(move |k| {
            (0..=self.max_edges).filter_map(move |m| {
                let c = self.count(k, m);
                (c != 0).then_some((k, m, c))
            })
        })
    }

    pub fn total(&self) -> u128 {
        self.counts.iter().map(|&c| c as u128).sum()
    }

    /// Checks the structural invariants: the counts sum to `2^C(n,2)`,
    /// no triangle appears with fewer than three edges, and the complete
    /// graph is the unique graph with all triangles.
    pub fn validate(&self) -> Result<()> {
        let expected = 1u128 << self.max_edges;
        if self.total() != expected {
            return Err(Error::Table(format!(
                "counts sum to {} instead of 2^{} = {expected}",
                self.total(),
                self.max_edges
            )));
        }
        for k in 1..=self.max_triangles {
            for m in 0..3.min(self.max_edges + 1) {
                if self.count(k, m) != 0 {
                    return Err(Error::Table(format!("{k} triangles with only {m} edges")));
                }
            }
        }
        if self.n >= 3 && self.count(self.max_triangles, self.max_edges) != 1 {
            return Err(Error::Table("complete graph cell is not 1".into()));
        }
        Ok(())
    }

    /// Writes the cache format: a `# n=<n> edges=<C(n,2)>` comment, a
    /// `k,m,count` header, then one row per nonzero cell.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# n={} edges={}\nk,m,count\n", self.n, self.max_edges);
        for (k, m, c) in self.nonzero() {
            writeln!(out, "{k},{m},{c}").expect("writing to a String");
        }
        out
    }

    /// Parses [`to_csv`](Self::to_csv) output and validates the invariants.
    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self> {
        let bad = |msg: String| Error::Table(msg);
        let mut lines = reader.lines();
        let mut next = || -> Result<Option<String>> {
            lines.next().transpose().map_err(|e| bad(e.to_string()))
        };
        let comment = next()?.ok_or_else(|| bad("empty table file".into()))?;
        let (n, edges) = parse_comment(&comment).ok_or_else(|| bad(format!("bad comment line {comment:?}")))?;
        if n < 3 || n > 16 {
            return Err(bad(format!("unsupported n = {n}")));
        }
        let mut table = Self::zeroed(n);
        if edges != table.max_edges {
            return Err(bad(format!("edges={edges} does not match n={n}")));
        }
        if next()?.as_deref() != Some("k,m,count") {
            return Err(bad("missing k,m,count header".into()));
        }
        while let Some(line) = next()? {
            if line.is_empty() {
                continue;
            }
            let mut it = line.split(',');
            let mut field = |name: &str| -> Result<u64> {
                it.next()
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| bad(format!("bad {name} in row {line:?}")))
            };
            let (k, m, c) = (field("k")? as usize, field("m")? as usize, field("count")?);
            if k > table.max_triangles || m > table.max_edges {
                return Err(bad(format!("cell ({k},{m}) out of range")));
            }
            *table.count_mut(k, m) = c;
        }
        table.validate()?;
        Ok(table)
    }
}

fn parse_comment(line: &str) -> Option<(usize, usize)> {
    let rest = line.strip_prefix("# n=")?;
    let (n, edges) = rest.split_once(" edges=")?;
    Some((n.trim().parse().ok()?, edges.trim().parse().ok()?))
}

/// Enumerates every edge subset of `K_n` with the default ceiling.
pub fn build_table(n: usize) -> Result<TriangleEdgeTable> {
    build_table_with_ceiling(n, DEFAULT_MAX_VERTICES)
}

pub fn build_table_with_ceiling(n: usize, ceiling: usize) -> Result<TriangleEdgeTable> {
    if n < 3 {
        return invalid(format!("exact table needs n >= 3, got {n}"));
    }
    if n > ceiling {
        return Err(Error::ResourceLimit(format!("n = {n} exceeds the enumeration ceiling {ceiling}")));
    }
    if n > 11 {
        // C(12,2) = 66 edge bits no longer fit a u64 mask
        return Err(Error::ResourceLimit(format!("n = {n} is beyond any enumerable size")));
    }
    let index = pair_index(n);
    let triangles: Vec<u64> = (0..n)
        .flat_map(|a| (a + 1..n).flat_map(move |b| (b + 1..n).map(move |c| (a, b, c))))
        .map(|(a, b, c)| (1u64 << index[a][b]) | (1u64 << index[a][c]) | (1u64 << index[b][c]))
        .collect();
    let edges = n * (n - 1) / 2;
    let total = 1u64 << edges;
    let chunks = total.div_ceil(MASK_CHUNK);
    let zero = TriangleEdgeTable::zeroed(n);
    let merged = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut part = zero.clone();
            let hi = ((c + 1) * MASK_CHUNK).min(total);
            for mask in c * MASK_CHUNK..hi {
                let k = triangles.iter().filter(|&&t| mask & t == t).count();
                *part.count_mut(k, mask.count_ones() as usize) += 1;
            }
            part
        })
        .reduce(
            || zero.clone(),
            |mut a, b| {
                a.counts.iter_mut().zip(&b.counts).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(merged)
}

/// `index[u][v]` is the bit of pair `uv` in lexicographic order.
pub fn pair_index(n: usize) -> Vec<Vec<usize>> {
    let mut index = vec![vec![usize::MAX; n]; n];
    let mut next = 0;
    for u in 0..n {
        for v in u + 1..n {
            index[u][v] = next;
            index[v][u] = next;
            next += 1;
        }
    }
    index
}

/// `P(X = k) = Σ_m c[k][m] p^m (1−p)^{C(n,2)−m}` for every `k`.
pub fn exact_pmf<S: Scalar>(table: &TriangleEdgeTable, p: S) -> Vec<S> {
    let q = S::one() - p.clone();
    let e = table.max_edges;
    let weights: Vec<S> = (0..=e).map(|m| powi(&p, m as u64) * powi(&q, (e - m) as u64)).collect();
    (0..=table.max_triangles)
        .map(|k| {
            (0..=e).fold(S::zero(), |acc, m| {
                let c = table.count(k, m);
                if c == 0 {
                    acc
                } else {
                    acc + from_count::<S>(c) * weights[m].clone()
                }
            })
        })
        .collect()
}

/// Exact `(E X, Var X)` from the enumerated law.
pub fn exact_moments<S: Scalar>(table: &TriangleEdgeTable, p: S) -> (S, S) {
    let pmf = exact_pmf(table, p);
    let mut m1 = S::zero();
    let mut m2 = S::zero();
    for (k, w) in pmf.into_iter().enumerate() {
        let k: S = from_count(k as u64);
        m1 = m1 + k.clone() * w.clone();
        m2 = m2 + k.clone() * k * w;
    }
    let var = m2 - m1.clone() * m1.clone();
    (m1, var)
}

/// `E e^{iθX} = Σ_k P(X=k) e^{iθk}`.
pub fn exact_charfn<T: Real>(table: &TriangleEdgeTable, p: T, theta: T) -> Complex<T> {
    charfn_of_pmf(&exact_pmf(table, p), theta)
}

/// Characteristic function of a pmf on `0..pmf.len()`.
pub fn charfn_of_pmf<T: Real>(pmf: &[T], theta: T) -> Complex<T> {
    pmf.iter().enumerate().fold(Complex::new(T::zero(), T::zero()), |acc, (k, &w)| {
        let k: T = from_count(k as u64);
        acc + Complex::from_polar(w, theta * k)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_table() {
        let t = build_table(3).unwrap();
        assert_eq!(t.count(1, 3), 1);
        for m in 0..3 {
            assert_eq!(t.count(0, m), binomial(3, m as u64) as u64);
        }
        assert_eq!(t.count(0, 3), 0);
    }

    #[test]
    fn k4_table() {
        let t = build_table(4).unwrap();
        assert_eq!(t.count(4, 6), 1);
        assert_eq!(t.total(), 64);
        t.validate().unwrap();
    }

    #[test]
    fn ceiling_is_enforced() {
        assert!(matches!(build_table(8), Err(Error::ResourceLimit(_))));
        assert!(matches!(build_table(2), Err(Error::InvalidParameter(_))));
        assert!(build_table_with_ceiling(5, 4).is_err());
    }

    #[test]
    fn pmf_simple_cases() {
        let t3 = build_table(3).unwrap();
        let p = 0.3f64;
        let pmf = exact_pmf(&t3, p);
        assert!((pmf[1] - p.powi(3)).abs() < 1e-15);
        let t4 = build_table(4).unwrap();
        let pmf4 = exact_pmf(&t4, 0.5f64);
        assert_eq!(pmf4[4], 1.0 / 64.0);
        for n in 3..=6 {
            let t = build_table(n).unwrap();
            for p in [0.1, 0.5, 0.9] {
                let s: f64 = exact_pmf(&t, p).iter().sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn charfn_simple_cases() {
        let t3 = build_table(3).unwrap();
        let p = 0.4f64;
        let one = exact_charfn(&t3, p, 0.0);
        assert!((one.re - 1.0).abs() < 1e-15 && one.im.abs() < 1e-15);
        let theta = 0.77;
        let got = exact_charfn(&t3, p, theta);
        let p3 = p.powi(3);
        let want = Complex::new(1.0 - p3, 0.0) + Complex::from_polar(p3, theta);
        assert!((got - want).norm() < 1e-15);
        let t5 = build_table(5).unwrap();
        let a = exact_charfn(&t5, p, 1.3);
        let b = exact_charfn(&t5, p, -1.3);
        assert!((a - b.conj()).norm() < 1e-15);
    }

    #[test]
    fn csv_round_trip_and_tamper_detection() {
        let t = build_table(5).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("# n=5 edges=10\nk,m,count\n"));
        let back = TriangleEdgeTable::from_csv(csv.as_bytes()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_csv(), csv);
        let tampered = csv.replacen("\n0,0,1\n", "\n0,0,2\n", 1);
        assert_ne!(tampered, csv);
        assert!(TriangleEdgeTable::from_csv(tampered.as_bytes()).is_err());
        assert!(TriangleEdgeTable::from_csv("k,m,count\n".as_bytes()).is_err());
    }
}
