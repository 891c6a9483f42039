use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use bcast_a5::barrington::{barrington_compile, default_target};
use bcast_a5::group::{product, Elem};
use bcast_a5::pair::{generate_pair_model, project_to_classes, PairLabel, PAIR_LABELS};
use bcast_a5::quotient::quotient_channel;
use bcast_a5::reduce::{
    amplify_oracle, perfect_oracle, randomize_word, synthetic_oracle, uniform_elem, Promise, WordInstance,
};
use bcast_a5::Model;
use bcast_core::bp::{bp_posterior, LeafLikelihood, Mode};
use bcast_core::estimators::{Estimator, LinearizedBp};
use bcast_core::formula::{assignments, Formula};
use bcast_core::gen::{generate_direct, generate_path_product, generate_via_restrictions};
use bcast_core::rational::{parse_rational, to_f64};
use bcast_core::rng::StreamRng;
use bcast_core::stats::binomial_stderr;
use bcast_core::{Channel, LabelArray, SeedSpec, TreeShape};
use bcast_experiments::config::EstimatorKind;
use bcast_experiments::verify::{run_all, Scale};
use bcast_experiments::{render, with_jobs, ExperimentConfig, ExperimentKind, OutputFormat, ResultRow};
use bcast_gadgets::{compile_formula, verify_template};

use crate::{Arith, Cli, Command, Format, Generator, Global, OracleArg, PromiseArg};

pub enum Status {
    Ok,
    /// A verification or configured assertion failed.
    Failed,
}

/// 3 for I/O failures anywhere in the chain, 1 otherwise.
pub fn error_code(e: &anyhow::Error) -> u8 {
    for c in e.chain() {
        if c.is::<std::io::Error>()
            || matches!(c.downcast_ref::<bcast_experiments::Error>(), Some(bcast_experiments::Error::Io(_)))
            || matches!(c.downcast_ref::<bcast_core::Error>(), Some(bcast_core::Error::Io(_)))
        {
            return 3;
        }
    }
    1
}

pub fn run(cli: Cli) -> Result<Status> {
    let jobs = cli.global.jobs;
    with_jobs(jobs, move || dispatch(cli))?
}

fn dispatch(cli: Cli) -> Result<Status> {
    let g = &cli.global;
    match cli.command {
        Command::Gen { k, d, theta, generator, root, binary } => {
            gen(g, k, d, theta.as_deref(), generator, root, binary)
        }
        Command::Bp { tree, theta, noise } => bp(g, &tree, theta.as_deref(), noise.as_deref()),
        Command::Detect { k, d, theta, trials, estimator, dump, log } => {
            detect(g, k, d, &theta, trials, &estimator, dump.as_deref(), log.as_deref())
        }
        Command::ScanKs { k, theta, d, trials, estimators } => {
            let cfg = experiment_config(g, ExperimentKind::KsScan, |c| {
                c.k = k;
                c.theta = theta;
                c.d = d;
                if let Some(t) = trials {
                    c.trials = t;
                }
                c.estimators = estimators.iter().map(|e| e.parse()).collect::<std::result::Result<Vec<_>, _>>()?;
                Ok(())
            })?;
            run_config(g, &cfg)
        }
        Command::ScanNoise { k, theta, d, s, trials } => {
            let cfg = experiment_config(g, ExperimentKind::NoiseScan, |c| {
                c.k = k;
                c.theta = theta;
                c.d = d;
                c.s = s;
                if let Some(t) = trials {
                    c.trials = t;
                }
                Ok(())
            })?;
            run_config(g, &cfg)
        }
        Command::A5 { model, k, d, trials, tau, min_accuracy } => {
            let cfg = experiment_config(g, ExperimentKind::A5Accuracy, |c| {
                c.models = if model.is_empty() {
                    vec![Model::Pair3600, Model::Class16]
                } else {
                    model.iter().map(|m| m.parse()).collect::<std::result::Result<Vec<_>, _>>()?
                };
                c.k = k;
                c.d = d;
                if let Some(t) = trials {
                    c.trials = t;
                }
                c.tau = tau;
                c.min_accuracy = min_accuracy;
                Ok(())
            })?;
            run_config(g, &cfg)
        }
        Command::CompileGadget { formula, check } => compile_gadget(g, &formula, check),
        Command::CompileBarrington { formula, target, inputs, check } => {
            compile_barrington(g, &formula, target, inputs.as_deref(), check)
        }
        Command::ReduceWord { length, target, promise, votes, oracle, advantage } => {
            if g.config.is_some() {
                let cfg = experiment_config(g, ExperimentKind::ReductionDemo, |_| Ok(()))?;
                return run_config(g, &cfg);
            }
            reduce_word(g, length, target, promise, votes, oracle, advantage)
        }
        Command::Verify { quick, only } => {
            if let Some(path) = &g.config {
                let mut cfg = ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
                apply_overrides(g, &mut cfg)?;
                return run_config(g, &cfg);
            }
            verify(g, if quick { Scale::Quick } else { Scale::Full }, &only)
        }
    }
}

fn seed(g: &Global) -> u64 {
    g.seed.unwrap_or(0)
}

fn rational_arg(name: &str, v: Option<&str>) -> Result<bcast_core::Rational> {
    let v = v.ok_or_else(|| anyhow!("--{name} is required"))?;
    parse_rational(v).with_context(|| format!("--{name}"))
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn json_bytes(v: &serde_json::Value) -> Vec<u8> {
    let mut b = serde_json::to_vec_pretty(v).expect("JSON value serializes");
    b.push(b'\n');
    b
}

fn output_format(g: &Global) -> OutputFormat {
    match g.format {
        Some(Format::Json) => OutputFormat::Json,
        _ => OutputFormat::Csv,
    }
}

fn gen(
    g: &Global,
    k: usize,
    d: u32,
    theta: Option<&str>,
    generator: Generator,
    root: Option<usize>,
    binary: bool,
) -> Result<Status> {
    let shape = TreeShape::new(k, d)?;
    let s = SeedSpec::new(seed(g), "gen");
    let tree_json;
    let tree_bytes;
    match generator {
        Generator::Direct | Generator::PathProduct | Generator::Restrictions => {
            let th = rational_arg("theta", theta)?;
            let t: LabelArray<u8> = match generator {
                Generator::Direct => generate_direct(&shape, &Channel::binary(th)?, &s, root)?,
                Generator::PathProduct => generate_path_product(&shape, &th, &s, root)?,
                _ => generate_via_restrictions(&shape, &th, &s, root)?,
            };
            tree_json = t.to_json();
            tree_bytes = t.to_bytes();
        }
        Generator::Pair3600 | Generator::Class16 => {
            let root = match root {
                Some(c) if c < PAIR_LABELS => Some(PairLabel::from_code(c as u16)),
                Some(c) => bail!("pair root code {c} is not below {PAIR_LABELS}"),
                None => None,
            };
            let t = generate_pair_model(&shape, &s, root)?;
            if generator == Generator::Class16 {
                let c = project_to_classes(&t)?;
                tree_json = c.to_json();
                tree_bytes = c.to_bytes();
            } else {
                tree_json = t.to_json();
                tree_bytes = t.to_bytes();
            }
        }
    }
    if binary {
        let out = g.out.as_deref().ok_or_else(|| anyhow!("--binary needs --out"))?;
        write_output(Some(out), &tree_bytes)?;
    } else {
        write_output(g.out.as_deref(), &json_bytes(&tree_json))?;
    }
    Ok(Status::Ok)
}

fn load_tree(path: &Path) -> Result<LabelArray<u16>> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.starts_with(b"BCAST1") {
        return Ok(LabelArray::from_bytes(&bytes)?);
    }
    let v: serde_json::Value = serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    Ok(LabelArray::from_json(&v)?)
}

fn mode(g: &Global, default: Mode) -> Mode {
    match g.mode {
        Some(Arith::Float) => Mode::Float,
        Some(Arith::Rational) => Mode::Rational,
        None => default,
    }
}

/// Posterior of a binary tree's leaves, shared by `bp` and `detect`.
fn binary_posterior(
    shape: &TreeShape,
    theta: &bcast_core::Rational,
    leaves: &[u8],
    mode: Mode,
) -> Result<bcast_core::bp::PosteriorReport> {
    let ev = LeafLikelihood::observed(leaves, 2)?;
    Ok(bp_posterior(shape, &Channel::binary(theta.clone())?, &ev, mode)?)
}

fn bp(g: &Global, tree: &Path, theta: Option<&str>, noise: Option<&str>) -> Result<Status> {
    let t = load_tree(tree)?;
    let shape = t.shape();
    let leaves: Vec<u8> = t.leaves().iter().map(|&c| c as u8).collect();
    let report = match t.m() {
        2 => {
            let th = rational_arg("theta", theta)?;
            match noise {
                None => binary_posterior(&shape, &th, &leaves, mode(g, Mode::Auto))?,
                Some(s) => {
                    let flip = Channel::flip(&parse_rational(s).context("--noise")?)?;
                    let ev = LeafLikelihood::through_channel(&leaves, &flip)?;
                    bp_posterior(&shape, &Channel::binary(th)?, &ev, mode(g, Mode::Auto))?
                }
            }
        }
        16 => {
            let ev = LeafLikelihood::observed(&leaves, 16)?;
            bp_posterior(&shape, &quotient_channel()?, &ev, mode(g, Mode::Auto))?
        }
        m => bail!("bp supports binary and class16 dumps, not m = {m}"),
    };
    let mut v = report.to_json();
    v["k"] = shape.k().into();
    v["d"] = shape.d().into();
    write_output(g.out.as_deref(), &json_bytes(&v))?;
    Ok(Status::Ok)
}

#[allow(clippy::too_many_arguments)]
fn detect(
    g: &Global,
    k: usize,
    d: u32,
    theta: &str,
    trials: u64,
    estimator: &str,
    dump: Option<&Path>,
    log: Option<&Path>,
) -> Result<Status> {
    let shape = TreeShape::new(k, d)?;
    let th = parse_rational(theta).context("--theta")?;
    let thf = to_f64(&th);
    let channel = Channel::binary(th.clone())?;
    let base = SeedSpec::new(seed(g), "detect");
    let exact = estimator == "bp-exact";
    let est = if exact {
        None
    } else {
        Some(match estimator.parse::<EstimatorKind>()? {
            EstimatorKind::Majority => Estimator::Majority,
            EstimatorKind::LinearizedBp => {
                let flip = match &g.flip_rate {
                    Some(f) => f.parse()?,
                    None => bcast_core::estimators::FlipRate::Exact,
                };
                Estimator::LinearizedBp(LinearizedBp::new(&shape, thf, flip, &base.with_tag("linearized"))?)
            }
            EstimatorKind::Bp => Estimator::Bp,
        })
    };
    if let Some(dir) = dump {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut log_lines = Vec::new();
    let mut correct = 0u64;
    for t in 0..trials {
        let s = base.trial(t);
        let tree: LabelArray<u8> = generate_direct(&shape, &channel, &s, None)?;
        let leaves = tree.leaves();
        let guess = match &est {
            Some(e) => e.estimate(&shape, thf, leaves, &s.with_tag("estimate")),
            None => {
                let r = binary_posterior(&shape, &th, leaves, mode(g, Mode::Rational))?;
                let guess =
                    if r.tie { (StreamRng::new(&s.with_tag("tie")).next_u64() & 1) as u8 } else { r.argmax as u8 };
                let line =
                    serde_json::json!({ "trial": t, "root": tree.root(), "guess": guess, "posterior": r.to_json() });
                log_lines.push(serde_json::to_string(&line)?);
                guess
            }
        };
        correct += (guess == tree.root()) as u64;
        if let Some(dir) = dump {
            let p = dir.join(format!("trial-{t}.json"));
            std::fs::write(&p, json_bytes(&tree.to_json())).with_context(|| format!("writing {}", p.display()))?;
        }
    }
    if let Some(p) = log {
        let mut text = log_lines.join("\n");
        if !text.is_empty() {
            text.push('\n');
        }
        std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
    }
    let acc = correct as f64 / trials.max(1) as f64;
    let row = ResultRow {
        experiment: "detect".into(),
        k,
        theta_or_channel: theta.to_string(),
        d,
        s: 0.0,
        estimator: estimator.into(),
        trials,
        accuracy: acc,
        stderr: binomial_stderr(acc, trials),
        advantage: acc - 0.5,
        seed: seed(g),
        wall_ms: 0,
    };
    write_output(g.out.as_deref(), &render(&[row], output_format(g))?)?;
    Ok(Status::Ok)
}

/// The config from --config (which must be of `kind`) or from flags, with
/// the global overrides applied.
fn experiment_config(
    g: &Global,
    kind: ExperimentKind,
    from_flags: impl FnOnce(&mut ExperimentConfig) -> Result<()>,
) -> Result<ExperimentConfig> {
    let mut cfg = match &g.config {
        Some(path) => {
            let c = ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
            if c.experiment != kind {
                bail!("{} holds a {} config, this subcommand runs {kind}", path.display(), c.experiment);
            }
            c
        }
        None => {
            let mut c = ExperimentConfig::new(kind, seed(g));
            from_flags(&mut c)?;
            c
        }
    };
    apply_overrides(g, &mut cfg)?;
    Ok(cfg)
}

fn apply_overrides(g: &Global, cfg: &mut ExperimentConfig) -> Result<()> {
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(f) = g.format {
        cfg.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
    }
    if let Some(f) = &g.flip_rate {
        cfg.flip_rate = Some(f.clone());
    }
    cfg.validate()?;
    Ok(())
}

/// Runs `cfg`, writes its table and reports failed assertions on stderr.
fn run_config(g: &Global, cfg: &ExperimentConfig) -> Result<Status> {
    let out = bcast_experiments::run_experiment(cfg)?;
    let bytes = render(&out.rows, cfg.format)?;
    let path: Option<PathBuf> = g.out.clone().or_else(|| cfg.output.clone());
    write_output(path.as_deref(), &bytes)?;
    let mut failed = false;
    for c in out.failures() {
        eprintln!("FAIL {}: {}", c.name, c.detail);
        failed = true;
    }
    Ok(if failed { Status::Failed } else { Status::Ok })
}

fn compile_gadget(g: &Global, formula: &str, check: bool) -> Result<Status> {
    let f: Formula = formula.parse()?;
    let t = compile_formula(&f)?;
    let mut status = Status::Ok;
    let mut v = t.to_json();
    if check {
        let n = f.num_vars();
        if n > 16 {
            bail!("--check enumerates 2^{n} assignments; at most 16 variables");
        }
        let (mut checked, mut bad) = (0u64, Vec::new());
        for a in assignments(n) {
            let verdict = verify_template(&f, &t, &a)?;
            checked += 1;
            if !verdict.tracks {
                bad.push(serde_json::json!({ "inputs": a, "posterior": verdict.posterior }));
            }
        }
        if !bad.is_empty() {
            status = Status::Failed;
        }
        v = serde_json::json!({ "template": v, "assignments": checked, "violations": bad });
    }
    write_output(g.out.as_deref(), &json_bytes(&v))?;
    Ok(status)
}

fn parse_inputs(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(anyhow!("--inputs takes a 0/1 string, found {c:?}")),
        })
        .collect()
}

fn elem_arg(name: &str, idx: usize) -> Result<Elem> {
    Elem::new(idx).ok_or_else(|| anyhow!("--{name} {idx} is not an element index below 60"))
}

fn compile_barrington(
    g: &Global,
    formula: &str,
    target: Option<usize>,
    inputs: Option<&str>,
    check: bool,
) -> Result<Status> {
    let f: Formula = formula.parse()?;
    let target = match target {
        Some(i) => elem_arg("target", i)?,
        None => default_target(),
    };
    let prog = barrington_compile(&f, target)?;
    let mut v = serde_json::json!({ "formula": f.to_string(), "length": prog.len(), "program": prog.to_json() });
    let mut status = Status::Ok;
    if let Some(s) = inputs {
        let a = parse_inputs(s)?;
        let word = prog.word(&a)?;
        v["inputs"] = s.into();
        v["word"] = word.iter().map(|e| e.index()).collect::<Vec<_>>().into();
        v["product"] = product(&word).index().into();
        v["value"] = f.eval(&a)?.into();
    }
    if check {
        let n = f.num_vars();
        if n > 20 {
            bail!("--check enumerates 2^{n} assignments; at most 20 variables");
        }
        let mut mismatches = 0u64;
        let mut checked = 0u64;
        for a in assignments(n) {
            let want = if f.eval(&a)? { target } else { Elem::IDENTITY };
            checked += 1;
            mismatches += (prog.evaluate(&a)? != want) as u64;
        }
        if mismatches > 0 {
            status = Status::Failed;
        }
        v["assignments"] = checked.into();
        v["mismatches"] = mismatches.into();
    }
    write_output(g.out.as_deref(), &json_bytes(&v))?;
    Ok(status)
}

fn reduce_word(
    g: &Global,
    length: usize,
    target: Option<usize>,
    promise: PromiseArg,
    votes: u64,
    oracle: OracleArg,
    advantage: f64,
) -> Result<Status> {
    let base = SeedSpec::new(seed(g), "reduce-word");
    let mut rng = StreamRng::new(&base.with_tag("instance"));
    let target = match target {
        Some(i) => elem_arg("target", i)?,
        None => loop {
            let e = uniform_elem(&mut rng);
            if !e.is_identity() {
                break e;
            }
        },
    };
    let promise = match promise {
        PromiseArg::Identity => Promise::Identity,
        PromiseArg::Target => Promise::Target,
    };
    let inst = WordInstance::random(length, target, promise, &mut rng)?;
    let (example, _) = randomize_word(&inst.word, &base.with_tag("example"))?;
    let amp = base.with_tag("amplify");
    let outcome = match oracle {
        OracleArg::Synthetic => {
            if !(0.0..=59.0 / 60.0).contains(&advantage) {
                bail!("--advantage {advantage} outside [0, 59/60]");
            }
            amplify_oracle(&synthetic_oracle(advantage), &inst, votes, &amp)?
        }
        OracleArg::Perfect => amplify_oracle(&perfect_oracle, &inst, votes, &amp)?,
    };
    let correct = outcome.decision == Some(promise);
    let v = serde_json::json!({
        "instance": inst.to_json(),
        "randomized_example": example.iter().map(|e| e.index()).collect::<Vec<_>>(),
        "randomized_product": product(&example).index(),
        "outcome": serde_json::to_value(&outcome)?,
        "correct": correct,
    });
    write_output(g.out.as_deref(), &json_bytes(&v))?;
    Ok(if correct { Status::Ok } else { Status::Failed })
}

fn verify(g: &Global, scale: Scale, only: &[u32]) -> Result<Status> {
    if let Some(&bad) = only.iter().find(|&&id| bcast_experiments::verify::criterion(id).is_none()) {
        bail!("no acceptance criterion {bad}");
    }
    let results = run_all(scale, only);
    let bytes = match g.format {
        Some(Format::Json) => json_bytes(&serde_json::to_value(&results)?),
        _ => {
            let mut s = String::new();
            for r in &results {
                s.push_str(&r.line());
                s.push('\n');
            }
            s.into_bytes()
        }
    };
    write_output(g.out.as_deref(), &bytes)?;
    Ok(if results.iter().all(|r| r.pass) { Status::Ok } else { Status::Failed })
}
