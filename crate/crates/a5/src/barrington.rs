//! Compiling boolean formulas into A5 group programs.
//!
//! A program is a list of instructions `(input, g_true, g_false)`. It
//! computes `f` with respect to a 5-cycle `τ` when its product is `τ` on
//! inputs where `f` holds and the identity elsewhere. Gates:
//!
//! - input `x_i`: one instruction `(i, τ, 1)`;
//! - `¬f`: the program for `f` w.r.t. `τ⁻¹` followed by the constant `τ`;
//! - `f ∧ g`: with 5-cycles `α, β` whose commutator `αβα⁻¹β⁻¹` is `τ`, the
//!   concatenation `P_f(α) P_g(β) P_f(α⁻¹) P_g(β⁻¹)`;
//! - `f ∨ g` as `¬(¬f ∧ ¬g)`.
//!
//! Commutator pairs are found by exhaustive search over the 24 five-cycles.

use std::collections::HashMap;
use std::sync::OnceLock;

use bcast_core::error::{Error, Result};
use bcast_core::formula::Formula;
use serde::{Deserialize, Serialize};

use crate::group::{Class, Elem};

/// Formulas deeper than this are rejected; program length grows as 4^depth.
pub const MAX_DEPTH: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instruction {
    /// 1-based input index, `None` for a constant instruction.
    pub input: Option<usize>,
    pub if_true: Elem,
    pub if_false: Elem,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupProgram {
    pub target: Elem,
    pub instructions: Vec<Instruction>,
}

impl GroupProgram {
    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// The word selected by `inputs` (`inputs[i - 1]` is `x_i`).
    pub fn word(&self, inputs: &[bool]) -> Result<Vec<Elem>> {
        self.instructions
            .iter()
            .map(|ins| match ins.input {
                None => Ok(ins.if_true),
                Some(i) => match inputs.get(i - 1) {
                    Some(&true) => Ok(ins.if_true),
                    Some(&false) => Ok(ins.if_false),
                    None => Err(Error::InvalidParameter(format!("input x{i} is unbound"))),
                },
            })
            .collect()
    }

    pub fn evaluate(&self, inputs: &[bool]) -> Result<Elem> {
        Ok(crate::group::product(&self.word(inputs)?))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "target": self.target.index(),
            "instructions": self.instructions.iter().map(|i| serde_json::json!({
                "input": i.input,
                "if_true": i.if_true.index(),
                "if_false": i.if_false.index(),
            })).collect::<Vec<_>>(),
        })
    }
}

fn five_cycles() -> Vec<Elem> {
    Elem::all().filter(|g| g.class() == Class::FiveCycle).collect()
}

pub fn commutator(a: Elem, b: Elem) -> Elem {
    a.mul(b).mul(a.inv()).mul(b.inv())
}

/// For every 5-cycle `τ`, the first pair of 5-cycles `(α, β)` in index
/// order with `[α, β] = τ`.
pub fn commutator_table() -> Result<&'static HashMap<Elem, (Elem, Elem)>> {
    static TABLE: OnceLock<std::result::Result<HashMap<Elem, (Elem, Elem)>, String>> = OnceLock::new();
    TABLE
        .get_or_init(|| {
            let cycles = five_cycles();
            let mut table = HashMap::new();
            for &t in &cycles {
                let found = cycles
                    .iter()
                    .flat_map(|&a| cycles.iter().map(move |&b| (a, b)))
                    .find(|&(a, b)| commutator(a, b) == t);
                match found {
                    Some(p) => {
                        table.insert(t, p);
                    }
                    None => return Err(format!("no 5-cycle commutator equals {t:?}")),
                }
            }
            Ok(table)
        })
        .as_ref()
        .map_err(|e| Error::InvalidParameter(e.clone()))
}

pub fn barrington_compile(formula: &Formula, target: Elem) -> Result<GroupProgram> {
    if target.class() != Class::FiveCycle {
        return Err(Error::InvalidParameter(format!("target {target:?} is not a 5-cycle")));
    }
    if formula.depth() > MAX_DEPTH {
        return Err(Error::InvalidParameter(format!("formula depth {} exceeds {MAX_DEPTH}", formula.depth())));
    }
    let table = commutator_table()?;
    let mut instructions = Vec::new();
    emit(formula, target, table, &mut instructions)?;
    Ok(GroupProgram { target, instructions })
}

fn emit(f: &Formula, t: Elem, table: &HashMap<Elem, (Elem, Elem)>, out: &mut Vec<Instruction>) -> Result<()> {
    match f {
        Formula::Var(i) => out.push(Instruction { input: Some(*i), if_true: t, if_false: Elem::IDENTITY }),
        Formula::Const(c) => {
            let g = if *c { t } else { Elem::IDENTITY };
            out.push(Instruction { input: None, if_true: g, if_false: g });
        }
        Formula::Not(a) => {
            emit(a, t.inv(), table, out)?;
            out.push(Instruction { input: None, if_true: t, if_false: t });
        }
        Formula::And(a, b) => {
            let &(alpha, beta) = table
                .get(&t)
                .ok_or_else(|| Error::InvalidParameter(format!("no commutator decomposition of {t:?}")))?;
            emit(a, alpha, table, out)?;
            emit(b, beta, table, out)?;
            emit(a, alpha.inv(), table, out)?;
            emit(b, beta.inv(), table, out)?;
        }
        Formula::Or(a, b) => {
            let g = Formula::not(Formula::and(Formula::not((**a).clone()), Formula::not((**b).clone())));
            emit(&g, t, table, out)?;
        }
    }
    Ok(())
}

/// A fixed 5-cycle, `(0 1 2 3 4)`.
pub fn default_target() -> Elem {
    Elem::from_perm([1, 2, 3, 4, 0]).unwrap()
}
