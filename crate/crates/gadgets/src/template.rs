//! Formula to leaf-template compilation on the 6-ary tree.
//!
//! A subformula compiled at height `h` occupies `6^h` consecutive leaves.
//!
//! - `f ∧ g`: children `(f, f, g, g, 0, 0)`
//! - `f ∨ g`: children `(f, f, g, g, 1, 1)`
//! - `¬f`: the template of `f ∨ f` with every entry complemented
//! - constants: a subtree of that constant
//! - a variable at height 0 is a single leaf; a subformula shallower than its
//!   slot is padded with `f ∧ f`, children `(f, f, f, f, 0, 0)`.

use std::fmt;
use std::str::FromStr;

use bcast_core::error::{Error, Result};
use bcast_core::formula::Formula;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const ARITY: usize = 6;

/// Default limit on compiled depth.
pub const DEFAULT_MAX_DEPTH: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LeafEntry {
    Const(bool),
    Var(usize),
    NegVar(usize),
}

impl LeafEntry {
    pub fn complement(self) -> Self {
        match self {
            LeafEntry::Const(b) => LeafEntry::Const(!b),
            LeafEntry::Var(i) => LeafEntry::NegVar(i),
            LeafEntry::NegVar(i) => LeafEntry::Var(i),
        }
    }

    pub fn value(self, inputs: &[bool]) -> Result<bool> {
        let get = |i: usize| {
            inputs.get(i - 1).copied().ok_or_else(|| Error::InvalidParameter(format!("input x{i} is unbound")))
        };
        match self {
            LeafEntry::Const(b) => Ok(b),
            LeafEntry::Var(i) => get(i),
            LeafEntry::NegVar(i) => get(i).map(|v| !v),
        }
    }
}

impl fmt::Display for LeafEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeafEntry::Const(b) => write!(f, "{}", *b as u8),
            LeafEntry::Var(i) => write!(f, "x{i}"),
            LeafEntry::NegVar(i) => write!(f, "!x{i}"),
        }
    }
}

impl FromStr for LeafEntry {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let var = |t: &str| t.strip_prefix('x').and_then(|n| n.parse::<usize>().ok()).filter(|&i| i >= 1);
        match s {
            "0" => Ok(LeafEntry::Const(false)),
            "1" => Ok(LeafEntry::Const(true)),
            _ => match s.strip_prefix('!') {
                Some(rest) => var(rest).map(LeafEntry::NegVar),
                None => var(s).map(LeafEntry::Var),
            }
            .ok_or_else(|| Error::Parse(format!("bad leaf entry {s:?}"))),
        }
    }
}

impl Serialize for LeafEntry {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LeafEntry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeafTemplate {
    pub depth: u32,
    pub entries: Vec<LeafEntry>,
}

impl LeafTemplate {
    pub fn validate(&self) -> Result<()> {
        let n = ARITY.checked_pow(self.depth).ok_or_else(|| Error::InvalidShape("template too deep".into()))?;
        if self.entries.len() != n {
            return Err(Error::SizeMismatch { expected: n, got: self.entries.len() });
        }
        Ok(())
    }

    pub fn complement(&self) -> Self {
        LeafTemplate { depth: self.depth, entries: self.entries.iter().map(|e| e.complement()).collect() }
    }

    /// Leaf bits under an assignment (`inputs[i - 1]` is `x_i`).
    pub fn instantiate(&self, inputs: &[bool]) -> Result<Vec<u8>> {
        self.entries.iter().map(|e| e.value(inputs).map(u8::from)).collect()
    }

    pub fn num_vars(&self) -> usize {
        self.entries
            .iter()
            .map(|e| match e {
                LeafEntry::Var(i) | LeafEntry::NegVar(i) => *i,
                LeafEntry::Const(_) => 0,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("template serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let t: LeafTemplate = serde_json::from_value(v.clone())?;
        t.validate()?;
        Ok(t)
    }
}

pub fn compile_formula(f: &Formula) -> Result<LeafTemplate> {
    compile_formula_with_limit(f, DEFAULT_MAX_DEPTH)
}

pub fn compile_formula_with_limit(f: &Formula, max_depth: u32) -> Result<LeafTemplate> {
    let depth = f.depth();
    if depth > max_depth {
        return Err(Error::InvalidParameter(format!("formula depth {depth} exceeds the limit {max_depth}")));
    }
    let mut entries = Vec::with_capacity(ARITY.pow(depth));
    emit(f, depth, &mut entries);
    Ok(LeafTemplate { depth, entries })
}

fn emit(f: &Formula, h: u32, out: &mut Vec<LeafEntry>) {
    if let Formula::Const(b) = f {
        out.extend(std::iter::repeat_n(LeafEntry::Const(*b), ARITY.pow(h)));
        return;
    }
    if h == 0 {
        match f {
            Formula::Var(i) => out.push(LeafEntry::Var(*i)),
            _ => unreachable!("gate {f} compiled at height 0"),
        }
        return;
    }
    let zeros = |out: &mut Vec<LeafEntry>| {
        out.extend(std::iter::repeat_n(LeafEntry::Const(false), 2 * ARITY.pow(h - 1)));
    };
    if f.depth() < h {
        for _ in 0..4 {
            emit(f, h - 1, out);
        }
        zeros(out);
        return;
    }
    match f {
        Formula::And(a, b) | Formula::Or(a, b) => {
            emit(a, h - 1, out);
            emit(a, h - 1, out);
            emit(b, h - 1, out);
            emit(b, h - 1, out);
            let c = matches!(f, Formula::Or(..));
            out.extend(std::iter::repeat_n(LeafEntry::Const(c), 2 * ARITY.pow(h - 1)));
        }
        Formula::Not(a) => {
            let start = out.len();
            for _ in 0..4 {
                emit(a, h - 1, out);
            }
            out.extend(std::iter::repeat_n(LeafEntry::Const(true), 2 * ARITY.pow(h - 1)));
            for e in &mut out[start..] {
                *e = e.complement();
            }
        }
        Formula::Var(_) | Formula::Const(_) => unreachable!("leaves have depth 0"),
    }
}
