use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lclt_harness::{run, HarnessError, Kind, Manifest, Overrides};

#[derive(Parser)]
#[command(name = "lclt", version, about = "Triangle-count local limit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Law of the triangle count.
    Pmf(Common),
    /// Characteristic function with regime bounds.
    Charfn(Common),
    /// Typical-α and single-vertex decoupling trials.
    Decouple(Common),
    /// Sup-lattice, ℓ1 and anticoncentration distances.
    Distances(Common),
    /// Elementary inequality checks.
    Verify(Common),
    /// Interval-cover check for the mid-range bounds.
    Cover(Common),
}

#[derive(Args)]
struct Common {
    /// TOML manifest; flags below override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    n: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build(kind: Kind, c: Common) -> Result<Manifest, HarnessError> {
    let mut m = match &c.config {
        Some(path) => {
            let m = Manifest::load(path)?;
            if m.kind != kind {
                return Err(HarnessError::Config(format!("{} holds a {} manifest, not {kind}", path.display(), m.kind)));
            }
            m
        }
        None => Manifest::new(kind),
    };
    m.apply(&Overrides { n: c.n, p: c.p, seed: c.seed, samples: c.samples, workers: c.workers, out: c.out });
    Ok(m)
}

fn main() -> ExitCode {
    let (kind, common) = match Cli::parse().command {
        Command::Pmf(c) => (Kind::Pmf, c),
        Command::Charfn(c) => (Kind::Charfn, c),
        Command::Decouple(c) => (Kind::Decoupling, c),
        Command::Distances(c) => (Kind::Distances, c),
        Command::Verify(c) => (Kind::ToolboxVerify, c),
        Command::Cover(c) => (Kind::CoverCheck, c),
    };
    match build(kind, common).and_then(run) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("lclt {kind}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
