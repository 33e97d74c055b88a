//! Experiment manifests: a flat TOML table of typed scalars and lists.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{config, Result};
use lclt_core::charfn::check_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Pmf,
    Charfn,
    Decoupling,
    Distances,
    ToolboxVerify,
    CoverCheck,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Pmf => "pmf",
            Kind::Charfn => "charfn",
            Kind::Decoupling => "decoupling",
            Kind::Distances => "distances",
            Kind::ToolboxVerify => "toolbox-verify",
            Kind::CoverCheck => "cover-check",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoupleMode {
    /// `|A′| ≥ |A|/2⁷` trials on an m-endowed partition.
    Typical,
    /// `P3 = {w}` trials.
    SingleVertex,
}

/// How `pmf` and `distances` obtain the law of `X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PmfMethod {
    /// Exact enumeration up to the oracle ceiling, Monte Carlo above it.
    Auto,
    ExactOracle,
    MonteCarlo,
    /// Fourier inversion of the exact characteristic function.
    Inversion,
}

fn one_or_many<'de, D, T>(d: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

/// Every key accepted in a manifest file. Scalars may be given wherever a
/// list is expected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub kind: Kind,
    #[serde(default, deserialize_with = "one_or_many", skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<u64>,
    #[serde(default, deserialize_with = "one_or_many", skip_serializing_if = "Vec::is_empty")]
    pub p: Vec<f64>,
    /// With `p` empty, each `n` gets `p = min(p_cap, p_scale·n^{-1/2})`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_cap: Option<f64>,
    #[serde(default, deserialize_with = "one_or_many", skip_serializing_if = "Vec::is_empty")]
    pub m: Vec<usize>,
    #[serde(default, deserialize_with = "one_or_many", skip_serializing_if = "Vec::is_empty")]
    pub t: Vec<f64>,
    #[serde(default, deserialize_with = "one_or_many", skip_serializing_if = "Vec::is_empty")]
    pub gamma: Vec<f64>,
    /// The Stein-regime cutoff `K`; defaults to `(ln n)^{8/γ}(p²n)^{1/2+γ}`.
    #[serde(default, deserialize_with = "one_or_many", skip_serializing_if = "Vec::is_empty")]
    pub k: Vec<f64>,
    #[serde(default, deserialize_with = "one_or_many", skip_serializing_if = "Vec::is_empty")]
    pub epsilon: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_edge: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ceiling: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<DecoupleMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<PmfMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
}

pub const DEFAULT_OUT: &str = "results";
pub const DEFAULT_GAMMA: f64 = 0.1;
pub const DEFAULT_EPSILON: f64 = lclt_core::metrics::DEFAULT_EPSILON;
pub const DEFAULT_C_EDGE: f64 = 1.0;
pub const DEFAULT_C3: f64 = 1.0;
pub const DEFAULT_POINTS: usize = 24;
pub const DEFAULT_TRIALS: u64 = 1_000;

/// Command-line values that replace manifest keys.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub n: Vec<u64>,
    pub p: Vec<f64>,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Manifest {
    pub fn new(kind: Kind) -> Self {
        Self {
            kind,
            n: Vec::new(),
            p: Vec::new(),
            p_scale: None,
            p_cap: None,
            m: Vec::new(),
            t: Vec::new(),
            gamma: Vec::new(),
            k: Vec::new(),
            epsilon: Vec::new(),
            seed: 0,
            samples: None,
            trials: None,
            c_edge: None,
            c3: None,
            ceiling: None,
            points: None,
            mode: None,
            method: None,
            out: None,
            workers: None,
            cache_dir: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).or_else(|e| config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .or_else(|e| config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if !o.n.is_empty() {
            self.n = o.n.clone();
        }
        if !o.p.is_empty() {
            self.p = o.p.clone();
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if o.samples.is_some() {
            self.samples = o.samples;
        }
        if o.workers.is_some() {
            self.workers = o.workers;
        }
        if o.out.is_some() {
            self.out = o.out.clone();
        }
    }

    /// Fills defaults that depend only on the kind, then checks ranges.
    pub fn resolve(mut self) -> Result<Self> {
        if self.gamma.is_empty() && matches!(self.kind, Kind::Charfn | Kind::CoverCheck) {
            self.gamma = vec![DEFAULT_GAMMA];
        }
        if self.epsilon.is_empty() && self.kind == Kind::Distances {
            self.epsilon = vec![DEFAULT_EPSILON];
        }
        if self.samples.is_none() {
            self.samples = match self.kind {
                Kind::Pmf | Kind::Distances => Some(1_000_000),
                Kind::Charfn => Some(100_000),
                Kind::Decoupling => Some(10_000),
                Kind::ToolboxVerify | Kind::CoverCheck => None,
            };
        }
        if self.kind == Kind::Decoupling {
            self.trials.get_or_insert(DEFAULT_TRIALS);
            self.mode.get_or_insert(DecoupleMode::Typical);
        }
        if self.kind == Kind::Charfn {
            self.c_edge.get_or_insert(DEFAULT_C_EDGE);
            self.points.get_or_insert(DEFAULT_POINTS);
        }
        if matches!(self.kind, Kind::Pmf | Kind::Distances) {
            self.method.get_or_insert(PmfMethod::Auto);
        }
        if self.kind == Kind::ToolboxVerify {
            self.c3.get_or_insert(DEFAULT_C3);
        }
        self.ceiling.get_or_insert(lclt_core::oracle::DEFAULT_MAX_VERTICES);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        for &g in &self.gamma {
            check_gamma(g)?;
        }
        for &p in &self.p {
            if !(0.0..=1.0).contains(&p) {
                return config(format!("p = {p} is not a probability"));
            }
        }
        if self.p_scale.is_some() != self.p_cap.is_some() {
            return config("p_scale and p_cap go together");
        }
        if !self.p.is_empty() && self.p_scale.is_some() {
            return config("give either p or p_scale/p_cap, not both");
        }
        let needs_cells = !matches!(self.kind, Kind::ToolboxVerify);
        if needs_cells && self.n.is_empty() {
            return config(format!("{} needs at least one n", self.kind));
        }
        if needs_cells && self.p.is_empty() && self.p_scale.is_none() {
            return config(format!("{} needs p or p_scale/p_cap", self.kind));
        }
        if matches!(self.kind, Kind::Charfn | Kind::Decoupling) && self.cells().len() != 1 {
            return config(format!("{} runs a single (n, p) cell", self.kind));
        }
        if self.kind == Kind::Decoupling && self.mode == Some(DecoupleMode::Typical) && self.m.len() != 1 {
            return config("typical-alpha trials need exactly one m");
        }
        if self.workers == Some(0) {
            return config("workers must be positive");
        }
        Ok(())
    }

    /// `(n, p)` cells: the product of the lists, or the `p_scale` path.
    pub fn cells(&self) -> Vec<(u64, f64)> {
        match (self.p_scale, self.p_cap) {
            (Some(scale), Some(cap)) if self.p.is_empty() => {
                self.n.iter().map(|&n| (n, cap.min(scale / (n as f64).sqrt()))).collect()
            }
            _ => self.n.iter().flat_map(|&n| self.p.iter().map(move |&p| (n, p))).collect(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    /// Hex prefix of the SHA-256 of the parameters, ignoring where output
    /// goes and how many workers run.
    pub fn key(&self) -> String {
        let mut canon = self.clone();
        canon.out = None;
        canon.workers = None;
        canon.cache_dir = None;
        let json = serde_json::to_string(&canon).expect("manifest serializes");
        hex::encode(Sha256::digest(json.as_bytes()))[..16].to_string()
    }

    pub fn out_root(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    pub fn cache_root(&self) -> PathBuf {
        self.cache_dir.clone().unwrap_or_else(|| self.out_root().join("cache"))
    }

    pub fn output_dir(&self) -> PathBuf {
        self.out_root().join(format!("{}_{}", self.kind, self.key()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::HarnessError;

    #[test]
    fn scalars_and_lists() {
        let m = Manifest::parse("kind = \"cover-check\"\nn = 1000000\np = [0.01, 0.02]\ngamma = 0.05\n").unwrap();
        assert_eq!(m.n, vec![1_000_000]);
        assert_eq!(m.p, vec![0.01, 0.02]);
        assert_eq!(m.cells().len(), 2);
        let back = Manifest::parse(&m.to_toml()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn unknown_keys_and_bad_gamma() {
        assert!(matches!(Manifest::parse("kind = \"pmf\"\nsmaples = 3\n"), Err(HarnessError::Config(_))));
        let m = Manifest::parse("kind = \"charfn\"\nn = 100\np = 0.3\ngamma = 0.2\n").unwrap();
        let err = m.resolve().unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn p_path() {
        let m = Manifest::parse("kind = \"distances\"\nn = [64, 512]\np_scale = 8.0\np_cap = 0.4\n").unwrap();
        let cells = m.cells();
        assert_eq!(cells[0], (64, 0.4));
        assert!((cells[1].1 - 8.0 / 512f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn key_ignores_workers_and_out() {
        let a = Manifest::parse("kind = \"pmf\"\nn = 6\np = 0.3\n").unwrap().resolve().unwrap();
        let mut b = a.clone();
        b.workers = Some(3);
        b.out = Some("elsewhere".into());
        assert_eq!(a.key(), b.key());
        let mut c = a.clone();
        c.seed = 1;
        assert_ne!(a.key(), c.key());
        let explicit = Manifest::parse("kind = \"pmf\"\nn = 6\np = 0.3\nsamples = 1000000\nmethod = \"auto\"\nceiling = 7\n")
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(a.key(), explicit.key());
    }

    #[test]
    fn single_cell_kinds() {
        let m = Manifest::parse("kind = \"charfn\"\nn = [10, 20]\np = 0.3\n").unwrap();
        assert!(m.resolve().is_err());
    }
}
