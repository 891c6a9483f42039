//! A5 machinery for broadcast processes with group-valued labels.
//!
//! - [`group`]: table-driven A5 and its S5 conjugacy classes.
//! - [`pair`]: the 3600-label pair model and projection to class pairs.
//! - [`quotient`]: the 16-label class-pair channel.
//! - [`product_tree`]: generation of the pair model from a fixed word.
//! - [`reconstruct`]: recursive root reconstruction from children tallies.
//! - [`barrington`]: formula to group-program compilation.
//! - [`reduce`]: word randomization, oracle amplification and the
//!   detection-to-word pipeline.

pub mod barrington;
pub mod group;
pub mod pair;
pub mod product_tree;
pub mod quotient;
pub mod reconstruct;
pub mod reduce;

pub use group::{classify, Class, Elem};
pub use pair::{ClassPair, PairLabel};
pub use reconstruct::Model;
