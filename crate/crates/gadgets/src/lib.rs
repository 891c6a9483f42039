//! Leaf gadgets on the 6-ary broadcast tree with `θ = 9/10`.
//!
//! [`template::compile_formula`] turns a fan-in-2 formula into an assignment
//! of constants, inputs and negated inputs to the leaves so that the exact
//! root posterior is at least 19/20 when the formula is true and at most
//! 1/20 when it is false. [`verify`] checks that claim by running belief
//! propagation; [`lemma`] checks the one-level bound it rests on.

pub mod lemma;
pub mod template;
pub mod verify;

pub use lemma::{gadget_posterior_bound, lemma_grid_check, GridReport};
pub use template::{compile_formula, compile_formula_with_limit, LeafEntry, LeafTemplate};
pub use verify::{verify_corpus, verify_gadget, verify_template, CorpusReport, GadgetVerdict};
