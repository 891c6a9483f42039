//! Dispatch, emission and worker pools.

use std::path::Path;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::demos::{run_a5_accuracy, run_gadget_corpus, run_reduction_demo};
use crate::equivalence::run_equivalence_suite;
use crate::error::{Error, Result};
use crate::outcome::Outcome;
use crate::row::render;
use crate::scan::{run_ks_scan, run_noise_scan};

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::KsScan => run_ks_scan(cfg),
        ExperimentKind::NoiseScan => run_noise_scan(cfg),
        ExperimentKind::A5Accuracy => run_a5_accuracy(cfg),
        ExperimentKind::EquivalenceSuite => run_equivalence_suite(cfg),
        ExperimentKind::GadgetCorpus => run_gadget_corpus(cfg),
        ExperimentKind::ReductionDemo => run_reduction_demo(cfg),
    }
}

/// Runs `f` on a dedicated pool of `jobs` workers (`0` means the default
/// pool size).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(f))
}

/// Runs the experiment and renders its table in the configured format.
pub fn run_to_bytes(cfg: &ExperimentConfig) -> Result<(Vec<u8>, Outcome)> {
    let out = run_experiment(cfg)?;
    let bytes = render(&out.rows, cfg.format)?;
    Ok((bytes, out))
}

/// Runs the experiment and writes its table to `path`, or to the config's
/// output path when `path` is `None`.
pub fn run_and_emit(cfg: &ExperimentConfig, path: Option<&Path>) -> Result<Outcome> {
    let (bytes, out) = run_to_bytes(cfg)?;
    let target = path.or(cfg.output.as_deref()).ok_or_else(|| Error::Config("no output path".into()))?;
    std::fs::write(target, bytes)?;
    Ok(out)
}
