//! `bcast`: generation, inference, compilation, reductions, scans and the
//! acceptance suite behind one binary.
//!
//! Exit codes: 0 success, 1 usage or parameter error, 2 a verification or
//! assertion failed, 3 I/O error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "bcast",
    version,
    about = "Broadcast processes on trees: sampling, inference, A5 models and verification"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Master seed (any 64-bit integer). Overrides the seed in --config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Experiment config (JSON). Replaces the per-subcommand grid flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Table format for result rows.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// BP arithmetic for `bp` and `detect --estimator bp-exact`.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<Arith>,
    /// Worker threads; 0 uses every available core. Output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// LinearizedBP flip rate: exact, lemma-bound, estimated:<trials>, or a number in [0, 1/2].
    #[arg(long, global = true)]
    pub flip_rate: Option<String>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arith {
    Float,
    Rational,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    Direct,
    PathProduct,
    Restrictions,
    Pair3600,
    Class16,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromiseArg {
    Identity,
    Target,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleArg {
    Synthetic,
    Perfect,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample one labelled tree and dump it as JSON (or raw bytes with --binary).
    Gen {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: u32,
        /// Channel parameter, decimal or p/q (binary generators only).
        #[arg(long)]
        theta: Option<String>,
        #[arg(long, value_enum, default_value = "direct")]
        generator: Generator,
        /// Fixed root label code; uniform when absent.
        #[arg(long)]
        root: Option<usize>,
        /// Write the `BCAST1` byte format instead of JSON (needs --out).
        #[arg(long)]
        binary: bool,
    },
    /// Root posterior of a dumped tree's leaves.
    Bp {
        /// Tree dump from `gen` (JSON or `BCAST1` bytes).
        #[arg(long)]
        tree: PathBuf,
        /// Channel parameter for binary trees; class16 trees use the class-pair channel.
        #[arg(long)]
        theta: Option<String>,
        /// Leaf flip probability in [0, 1/2]: observe the leaves through a symmetric flip.
        #[arg(long)]
        noise: Option<String>,
    },
    /// Run one estimator on freshly sampled binary trees.
    Detect {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        theta: String,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// majority, linearized-bp, bp (float rounding) or bp-exact.
        #[arg(long, default_value = "bp")]
        estimator: String,
        /// Directory for per-trial tree dumps (`trial-<t>.json`).
        #[arg(long)]
        dump: Option<PathBuf>,
        /// JSON-lines log of every bp-exact posterior.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Estimator accuracy over a (k, theta, d) grid.
    ScanKs {
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        theta: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        d: Vec<u32>,
        #[arg(long)]
        trials: Option<u64>,
        /// Subset of majority, linearized-bp, bp (all when absent).
        #[arg(long, value_delimiter = ',')]
        estimators: Vec<String>,
    },
    /// Bayes accuracy from noisy leaves over a (k, theta, d, s) grid.
    ScanNoise {
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        theta: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        d: Vec<u32>,
        #[arg(long, value_delimiter = ',')]
        s: Vec<f64>,
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Recursive reconstruction accuracy in the pair and class-pair models.
    A5 {
        /// pair3600, class16 (both when absent).
        #[arg(long, value_delimiter = ',')]
        model: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        d: Vec<u32>,
        #[arg(long)]
        trials: Option<u64>,
        /// Tally threshold, decimal or p/q.
        #[arg(long)]
        tau: Option<String>,
        /// Fail (exit 2) below this accuracy.
        #[arg(long)]
        min_accuracy: Option<f64>,
    },
    /// Compile a formula such as `(and x1 (not x2))` into a leaf template.
    CompileGadget {
        #[arg(long)]
        formula: String,
        /// Check the root posterior on every assignment; exit 2 on a violation.
        #[arg(long)]
        check: bool,
    },
    /// Compile a formula into an A5 group program.
    CompileBarrington {
        #[arg(long)]
        formula: String,
        /// Target 5-cycle as an element index (default: the fixed target).
        #[arg(long)]
        target: Option<usize>,
        /// Evaluate on one assignment given as a 0/1 string, e.g. 0110.
        #[arg(long)]
        inputs: Option<String>,
        /// Check every assignment; exit 2 on a mismatch.
        #[arg(long)]
        check: bool,
    },
    /// Randomize a promise word and decide it by amplifying a weak oracle.
    ReduceWord {
        #[arg(long, default_value_t = 16)]
        length: usize,
        /// Target element index (random non-identity when absent).
        #[arg(long)]
        target: Option<usize>,
        #[arg(long, value_enum, default_value = "target")]
        promise: PromiseArg,
        #[arg(long, default_value_t = 1001)]
        votes: u64,
        #[arg(long, value_enum, default_value = "synthetic")]
        oracle: OracleArg,
        /// Synthetic oracle's advantage over 1/60.
        #[arg(long, default_value_t = 0.1)]
        advantage: f64,
    },
    /// Run the acceptance criteria, or the assertions of --config.
    Verify {
        /// Smaller samples, no runtime budgets.
        #[arg(long)]
        quick: bool,
        /// Criterion ids to run, e.g. 1,2,8.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match commands::run(cli) {
        Ok(commands::Status::Ok) => ExitCode::SUCCESS,
        Ok(commands::Status::Failed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::error_code(&e))
        }
    }
}
