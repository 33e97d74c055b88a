//! Experiment harness: manifests in, one result directory out.

pub mod cache;
pub mod error;
pub mod experiments;
pub mod manifest;

use std::fs;
use std::path::{Path, PathBuf};

pub use error::{HarnessError, Result};
pub use experiments::{execute, fmt_f64, Artifacts};
pub use manifest::{DecoupleMode, Kind, Manifest, Overrides, PmfMethod};

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const ECHO_FILE: &str = "manifest.echo";

/// Resolves the manifest, runs it on a pool of `workers` threads and writes
/// `<out>/<kind>_<key>/`. An existing directory for the same key is replaced.
pub fn run(manifest: Manifest) -> Result<PathBuf> {
    let manifest = manifest.resolve()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = manifest.workers {
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let artifacts = pool.install(|| execute(&manifest))?;
    write_outputs(&manifest, &artifacts)
}

/// Writes into a hidden sibling directory, then renames it into place.
pub fn write_outputs(manifest: &Manifest, a: &Artifacts) -> Result<PathBuf> {
    let root = manifest.out_root();
    fs::create_dir_all(&root)?;
    let dest = manifest.output_dir();
    let partial = root.join(format!(".{}_{}.partial", manifest.kind, manifest.key()));
    if partial.exists() {
        fs::remove_dir_all(&partial)?;
    }
    let written = fill(&partial, manifest, a).and_then(|()| {
        if dest.exists() {
            fs::remove_dir_all(&dest)?;
        }
        fs::rename(&partial, &dest)?;
        Ok(())
    });
    if let Err(e) = written {
        let _ = fs::remove_dir_all(&partial);
        return Err(e);
    }
    Ok(dest)
}

fn fill(dir: &Path, manifest: &Manifest, a: &Artifacts) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(RESULTS_FILE), &a.csv)?;
    let summary = serde_json::to_string_pretty(&a.summary).expect("summary serializes");
    fs::write(dir.join(SUMMARY_FILE), summary + "\n")?;
    fs::write(dir.join(ECHO_FILE), manifest.to_toml())?;
    for (name, body) in &a.extra {
        fs::write(dir.join(name), body)?;
    }
    Ok(())
}
