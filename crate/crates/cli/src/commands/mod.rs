//! The four verbs. Each returns a [`Report`] and writes its CSV artifacts
//! into the output directory; the caller writes the report itself.

use std::path::{Path, PathBuf};

use anyhow::Context as _;
use logeuler_core::tolerances::Tolerances;
use rand_xoshiro::rand_core::SeedableRng;
use rand_xoshiro::SplitMix64;
use serde::Serialize;

use crate::report::Report;

mod check_eos;
mod equivalence;
mod run;
mod symmetrizer;

pub use check_eos::check_eos;
pub use equivalence::equivalence;
pub use run::run;
pub use symmetrizer::verify_symmetrizer;

/// Settings shared by every verb.
#[derive(Debug, Clone)]
pub struct Context {
    pub seed: u64,
    pub samples: usize,
    pub out: PathBuf,
    pub tol: Tolerances,
}

impl Context {
    pub fn new(seed: u64, samples: usize, out: impl Into<PathBuf>, tol_scale: f64) -> Self {
        Self { seed, samples, out: out.into(), tol: Tolerances::default().scaled(tol_scale) }
    }

    /// SplitMix64 seeded with `--seed`; the whole sample set follows from it.
    pub fn rng(&self) -> SplitMix64 {
        SplitMix64::seed_from_u64(self.seed)
    }
}

/// Serialize `rows` to `ctx.out/name` and register the file on the report.
fn write_csv<R: Serialize>(ctx: &Context, report: &mut Report, name: &str, rows: &[R]) -> anyhow::Result<()> {
    let path = ctx.out.join(name);
    write_rows(&path, rows)?;
    report.artifacts.push(path);
    Ok(())
}

fn write_rows<R: Serialize>(path: &Path, rows: &[R]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, |m, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x) })
}
