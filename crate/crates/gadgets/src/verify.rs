//! Instantiating templates and checking that the root posterior tracks the
//! formula.

use bcast_core::bp::{bp_posterior, LeafLikelihood, Mode};
use bcast_core::error::{Error, Result};
use bcast_core::formula::{assignments, Formula};
use bcast_core::rational::rat;
use bcast_core::{Channel, Rational, TreeShape};
use rayon::prelude::*;
use serde::Serialize;

use crate::template::{compile_formula_with_limit, LeafTemplate, ARITY};

/// Templates up to this depth are decided with exact rational BP.
pub const RATIONAL_MAX_DEPTH: u32 = 4;

pub fn gadget_channel() -> Channel {
    Channel::binary(rat(9, 10)).expect("9/10 is a valid correlation")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GadgetVerdict {
    pub formula_value: bool,
    /// `P[root = 1 | leaves]`.
    pub posterior: f64,
    #[serde(serialize_with = "ser_opt_rational")]
    pub exact: Option<Rational>,
    pub tracks: bool,
}

fn ser_opt_rational<S: serde::Serializer>(v: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.serialize_some(&bcast_core::rational::format_rational(r)),
        None => s.serialize_none(),
    }
}

/// Root posterior of the template's leaves under `inputs`, exact up to
/// depth 4 and log-domain floats above.
pub fn template_posterior(t: &LeafTemplate, inputs: &[bool]) -> Result<(f64, Option<Rational>)> {
    t.validate()?;
    let leaves = t.instantiate(inputs)?;
    let shape = TreeShape::new(ARITY, t.depth)?;
    let mode = if t.depth <= RATIONAL_MAX_DEPTH { Mode::Rational } else { Mode::Float };
    let r = bp_posterior(&shape, &gadget_channel(), &LeafLikelihood::observed(&leaves, 2)?, mode)?;
    Ok((r.masses[1], r.exact.map(|e| e[1].clone())))
}

/// Tracking means posterior >= 19/20 when the formula holds and <= 1/20
/// when it does not. Rational verdicts are exact.
pub fn verify_template(f: &Formula, t: &LeafTemplate, inputs: &[bool]) -> Result<GadgetVerdict> {
    let value = f.eval(inputs)?;
    let (posterior, exact) = template_posterior(t, inputs)?;
    let tracks = match &exact {
        Some(p) => {
            if value {
                *p >= rat(19, 20)
            } else {
                *p <= rat(1, 20)
            }
        }
        None => {
            if value {
                posterior >= 0.95
            } else {
                posterior <= 0.05
            }
        }
    };
    Ok(GadgetVerdict { formula_value: value, posterior, exact, tracks })
}

pub fn verify_gadget(f: &Formula, inputs: &[bool], max_depth: u32) -> Result<GadgetVerdict> {
    let t = compile_formula_with_limit(f, max_depth)?;
    verify_template(f, &t, inputs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusReport {
    pub formulas: usize,
    pub checks: u64,
    pub violations: Vec<Violation>,
    /// Smallest posterior over true cases (1 when there are none).
    pub min_true: f64,
    /// Largest posterior over false cases (0 when there are none).
    pub max_false: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub formula: String,
    pub inputs: Vec<bool>,
    pub posterior: f64,
}

/// Compiles every formula and checks all `2^vars` assignments. `vars` must
/// cover every variable used.
pub fn verify_corpus(formulas: &[Formula], vars: usize, max_depth: u32) -> Result<CorpusReport> {
    if vars > 20 {
        return Err(Error::InvalidParameter(format!("{vars} inputs is too many to enumerate")));
    }
    let templates: Vec<LeafTemplate> =
        formulas.iter().map(|f| compile_formula_with_limit(f, max_depth)).collect::<Result<_>>()?;
    let jobs: Vec<(usize, Vec<bool>)> =
        (0..formulas.len()).flat_map(|i| assignments(vars).map(move |a| (i, a))).collect();
    let verdicts: Vec<(usize, Vec<bool>, GadgetVerdict)> = jobs
        .into_par_iter()
        .map(|(i, a)| {
            let v = verify_template(&formulas[i], &templates[i], &a)?;
            Ok((i, a, v))
        })
        .collect::<Result<_>>()?;
    let mut report =
        CorpusReport { formulas: formulas.len(), checks: 0, violations: Vec::new(), min_true: 1.0, max_false: 0.0 };
    for (i, a, v) in verdicts {
        report.checks += 1;
        if v.formula_value {
            report.min_true = report.min_true.min(v.posterior);
        } else {
            report.max_false = report.max_false.max(v.posterior);
        }
        if !v.tracks {
            report.violations.push(Violation { formula: formulas[i].to_string(), inputs: a, posterior: v.posterior });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjunction_tracks_on_all_inputs() {
        let f = Formula::parse("(and x1 x2)").unwrap();
        for a in assignments(2) {
            let v = verify_gadget(&f, &a, 6).unwrap();
            assert!(v.tracks, "{a:?}: {}", v.posterior);
            assert!(v.exact.is_some());
        }
    }

    #[test]
    fn unbound_variable_is_an_error() {
        let f = Formula::parse("(or x1 x3)").unwrap();
        assert!(verify_gadget(&f, &[true, false], 6).is_err());
    }

    #[test]
    fn complement_template_complements_posterior() {
        let f = Formula::parse("(or (not x1) (and x2 1))").unwrap();
        let t = compile_formula_with_limit(&f, 6).unwrap();
        let c = t.complement();
        for a in assignments(2) {
            let p = template_posterior(&t, &a).unwrap().1.unwrap();
            let q = template_posterior(&c, &a).unwrap().1.unwrap();
            assert_eq!(p + q, rat(1, 1));
        }
    }
}
