use std::time::Instant;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::row::ResultRow;

/// One asserted property of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), pass, detail: detail.into() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Outcome {
    pub rows: Vec<ResultRow>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn extend(&mut self, other: Outcome) {
        self.rows.extend(other.rows);
        self.checks.extend(other.checks);
    }
}

/// Runs `f`, returning its value and the elapsed milliseconds when the
/// config records wall time (0 otherwise).
pub(crate) fn timed<T>(cfg: &ExperimentConfig, f: impl FnOnce() -> T) -> (T, u64) {
    let start = Instant::now();
    let v = f();
    let ms = if cfg.record_wall_time { start.elapsed().as_millis() as u64 } else { 0 };
    (v, ms)
}

/// Seed tag naming one grid point, e.g. `ks-scan/k=2/theta=0.8/d=6`.
pub(crate) fn point_tag(kind: &str, parts: &[(&str, String)]) -> String {
    let mut tag = kind.to_string();
    for (name, v) in parts {
        tag.push('/');
        tag.push_str(name);
        tag.push('=');
        tag.push_str(v);
    }
    tag
}
