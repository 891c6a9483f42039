//! Broadcast processes on regular trees.
//!
//! The crate is organised bottom-up:
//!
//! - [`tree`] and [`rng`] give level-order node addressing and per-node
//!   counter-based randomness, so every generator is a pure function of
//!   `(seed, stream tag, node address)`.
//! - [`channel`] holds exact column-stochastic transmission matrices.
//! - [`joint`] is the brute-force enumeration oracle: exact rational
//!   leaf laws for small trees.
//! - [`gen`] contains the generators (direct, path-product, restriction
//!   composition), biased-bit samplers and the leaf noise channel.
//! - [`bp`] and [`estimators`] implement exact belief propagation and the
//!   root estimators built on top of it.
//! - [`formula`] is the boolean formula AST shared by the compilers.

pub mod bp;
pub mod channel;
pub mod error;
pub mod estimators;
pub mod formula;
pub mod gen;
pub mod joint;
pub mod labels;
pub mod rational;
pub mod rng;
pub mod stats;
pub mod tree;

pub use channel::Channel;
pub use error::{Error, Result};
pub use labels::{LabelArray, LabelCode};
pub use rng::{NodeRng, SeedSpec};
pub use tree::{NodeAddr, TreeShape};

/// Exact rational numbers used throughout the verification paths.
pub type Rational = num::BigRational;
