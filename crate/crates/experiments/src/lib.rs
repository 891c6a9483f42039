//! Reproducible experiments over the broadcast-tree toolkit.
//!
//! A run is a pure function of its [`ExperimentConfig`] (including the
//! master seed): every grid point draws from its own seed tag, trials are
//! combined with order-independent sums, and rows are sorted before they
//! are written. [`verify`] holds the acceptance criteria.

pub mod config;
pub mod demos;
pub mod equivalence;
pub mod error;
pub mod outcome;
pub mod row;
pub mod run;
pub mod scan;
pub mod verify;

pub use config::{ExperimentConfig, ExperimentKind, OutputFormat, Thresholds};
pub use error::{Error, Result};
pub use outcome::{Check, Outcome};
pub use row::{emit, parse_csv, render, ResultRow, CSV_HEADER};
pub use run::{run_and_emit, run_experiment, run_to_bytes, with_jobs};
