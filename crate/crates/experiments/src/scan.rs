//! Binary-tree scans: estimator accuracy across the Kesten-Stigum
//! threshold, and noisy-leaf Bayes accuracy `P_{s,d}`.

use std::collections::BTreeMap;

use bcast_core::estimators::{
    estimate_p_sd_mc, exact_p_sd, ks_parameter, run_binary_trials, Estimator, EstimatorReport, LinearizedBp,
};
use bcast_core::joint::{config_count, EnumerationConfig};
use bcast_core::rational::to_f64;
use bcast_core::stats::binomial_stderr;
use bcast_core::{Channel, Rational, SeedSpec, TreeShape};

use crate::config::{decimal, EstimatorKind, ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};
use crate::outcome::{point_tag, timed, Check, Outcome};
use crate::row::ResultRow;

fn expect_kind(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if cfg.experiment != kind {
        return Err(Error::Config(format!("expected a {kind} config, got {}", cfg.experiment)));
    }
    cfg.validate()
}

pub(crate) fn report_row(
    cfg: &ExperimentConfig,
    k: usize,
    label: String,
    d: u32,
    s: f64,
    r: &EstimatorReport,
) -> ResultRow {
    ResultRow {
        experiment: cfg.experiment.name().into(),
        k,
        theta_or_channel: label,
        d,
        s,
        estimator: r.estimator.clone(),
        trials: r.trials,
        accuracy: r.accuracy,
        stderr: r.stderr,
        advantage: r.advantage,
        seed: cfg.seed,
        wall_ms: 0,
    }
}

/// Majority, LinearizedBP and full BP rounding on the same trees at every
/// `(k, theta, d)` grid point. Each row's channel label carries `k theta^2`.
pub fn run_ks_scan(cfg: &ExperimentConfig) -> Result<Outcome> {
    expect_kind(cfg, ExperimentKind::KsScan)?;
    let flip = cfg.flip_rate()?;
    let band = cfg.thresholds.stderr_band;
    let mut out = Outcome::default();
    for &k in &cfg.k {
        for &theta in &cfg.theta {
            let ks = ks_parameter(&Channel::binary(decimal(theta)?)?, k)?;
            for &d in &cfg.d {
                let shape = TreeShape::new(k, d)?;
                let tag =
                    point_tag("ks-scan", &[("k", k.to_string()), ("theta", theta.to_string()), ("d", d.to_string())]);
                let seed = SeedSpec::new(cfg.seed, tag);
                let estimators = cfg
                    .estimators()
                    .into_iter()
                    .map(|e| {
                        Ok(match e {
                            EstimatorKind::Majority => Estimator::Majority,
                            EstimatorKind::LinearizedBp => {
                                Estimator::LinearizedBp(LinearizedBp::new(&shape, theta, flip, &seed)?)
                            }
                            EstimatorKind::Bp => Estimator::Bp,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let (reports, ms) = timed(cfg, || run_binary_trials(&shape, theta, cfg.trials, &seed, &estimators));
                for r in reports? {
                    let point = format!("k={k}, theta={theta}, d={d}, {}", r.estimator);
                    if theta == 0.0 {
                        let se = binomial_stderr(0.5, r.trials);
                        let dev = (r.accuracy - 0.5).abs();
                        out.checks.push(Check::new(
                            format!("ks-scan independent channel at chance ({point})"),
                            dev <= band * se,
                            format!("accuracy {:.4}, |acc - 1/2| = {dev:.4}, band {:.4}", r.accuracy, band * se),
                        ));
                    }
                    if theta == 1.0 {
                        out.checks.push(Check::new(
                            format!("ks-scan noiseless channel is exact ({point})"),
                            r.correct == r.trials,
                            format!("{} of {} correct", r.correct, r.trials),
                        ));
                    }
                    let mut row = report_row(cfg, k, format!("{theta} ks={ks:.6}"), d, 0.0, &r);
                    row.wall_ms = ms;
                    out.rows.push(row);
                }
            }
        }
    }
    Ok(out)
}

/// One `P_{s,d}` value.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdPoint {
    pub accuracy: f64,
    pub stderr: f64,
    pub exact: Option<Rational>,
}

impl PsdPoint {
    /// `self <= other` up to the stderr band (exactly when both are exact).
    fn at_most(&self, other: &PsdPoint, band: f64) -> bool {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => a <= b,
            _ => self.accuracy <= other.accuracy + band * self.stderr.hypot(other.stderr),
        }
    }
}

/// `P_{s,d}` for one tree, exact under the enumeration cap and Monte Carlo
/// BP decoding otherwise.
pub fn p_sd_point(shape: &TreeShape, theta: f64, s: f64, trials: u64, seed: &SeedSpec) -> Result<PsdPoint> {
    if config_count(shape, 2, EnumerationConfig::default().cap).is_ok() {
        let v = exact_p_sd(shape, &decimal(theta)?, &decimal(s)?)?;
        return Ok(PsdPoint { accuracy: to_f64(&v), stderr: 0.0, exact: Some(v) });
    }
    let r = estimate_p_sd_mc(shape, theta, s, trials, seed)?;
    Ok(PsdPoint { accuracy: r.accuracy, stderr: r.stderr, exact: None })
}

type PsdGrid = BTreeMap<(usize, usize, u32, usize), PsdPoint>;

fn monotone_check(name: String, points: &[(String, &PsdPoint)], band: f64) -> Check {
    let mut bad = Vec::new();
    for w in points.windows(2) {
        let (ref a_label, a) = w[0];
        let (ref b_label, b) = w[1];
        if !b.at_most(a, band) {
            bad.push(format!("P({b_label}) = {:.6} > P({a_label}) = {:.6}", b.accuracy, a.accuracy));
        }
    }
    let detail = if bad.is_empty() {
        let vals: Vec<String> = points.iter().map(|(l, p)| format!("{l}: {:.6}", p.accuracy)).collect();
        vals.join(", ")
    } else {
        bad.join("; ")
    };
    Check::new(name, bad.is_empty(), detail)
}

/// `P_{s,d}` over the grid, with monotonicity verdicts in `s` (at fixed `d`)
/// and in `d` (at fixed `s`), and the `s = 1/2` sanity check.
pub fn run_noise_scan(cfg: &ExperimentConfig) -> Result<Outcome> {
    expect_kind(cfg, ExperimentKind::NoiseScan)?;
    let band = cfg.thresholds.stderr_band;
    let mut out = Outcome::default();
    let mut grid = PsdGrid::new();
    let mut s_order: Vec<usize> = (0..cfg.s.len()).collect();
    s_order.sort_by(|&a, &b| cfg.s[a].total_cmp(&cfg.s[b]));
    let mut d_sorted = cfg.d.clone();
    d_sorted.sort_unstable();
    d_sorted.dedup();
    for &k in &cfg.k {
        for (ti, &theta) in cfg.theta.iter().enumerate() {
            for &d in &d_sorted {
                let shape = TreeShape::new(k, d)?;
                for &si in &s_order {
                    let s = cfg.s[si];
                    let tag = point_tag(
                        "noise-scan",
                        &[
                            ("k", k.to_string()),
                            ("theta", theta.to_string()),
                            ("d", d.to_string()),
                            ("s", s.to_string()),
                        ],
                    );
                    let (p, ms) =
                        timed(cfg, || p_sd_point(&shape, theta, s, cfg.trials, &SeedSpec::new(cfg.seed, tag)));
                    let p = p?;
                    let (estimator, trials) =
                        if p.exact.is_some() { ("bayes-exact", 0) } else { ("bp-noisy", cfg.trials) };
                    out.rows.push(ResultRow {
                        experiment: "noise-scan".into(),
                        k,
                        theta_or_channel: theta.to_string(),
                        d,
                        s,
                        estimator: estimator.into(),
                        trials,
                        accuracy: p.accuracy,
                        stderr: p.stderr,
                        advantage: p.accuracy - 0.5,
                        seed: cfg.seed,
                        wall_ms: ms,
                    });
                    if s == 0.5 {
                        let pass = match &p.exact {
                            Some(v) => *v == Rational::new(1.into(), 2.into()),
                            None => (p.accuracy - 0.5).abs() <= band * binomial_stderr(0.5, cfg.trials),
                        };
                        out.checks.push(Check::new(
                            format!("noise-scan s=1/2 at chance (k={k}, theta={theta}, d={d})"),
                            pass,
                            format!("P = {:.6}", p.accuracy),
                        ));
                    }
                    grid.insert((k, ti, d, si), p);
                }
            }
        }
    }
    for &k in &cfg.k {
        for (ti, &theta) in cfg.theta.iter().enumerate() {
            for &d in &d_sorted {
                let pts: Vec<(String, &PsdPoint)> =
                    s_order.iter().map(|&si| (format!("s={}", cfg.s[si]), &grid[&(k, ti, d, si)])).collect();
                out.checks.push(monotone_check(
                    format!("noise-scan nonincreasing in s (k={k}, theta={theta}, d={d})"),
                    &pts,
                    band,
                ));
            }
            for &si in &s_order {
                let pts: Vec<(String, &PsdPoint)> =
                    d_sorted.iter().map(|&d| (format!("d={d}"), &grid[&(k, ti, d, si)])).collect();
                out.checks.push(monotone_check(
                    format!("noise-scan nonincreasing in d (k={k}, theta={theta}, s={})", cfg.s[si]),
                    &pts,
                    band,
                ));
            }
        }
    }
    Ok(out)
}
