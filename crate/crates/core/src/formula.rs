//! Fan-in-2 boolean formulas with a small prefix syntax:
//! `(and x1 (not x2))`, `(or x1 0)`, `x3`, `1`.

use std::fmt;

use crate::error::{Error, Result};
use crate::rng::StreamRng;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    /// Input variable, numbered from 1.
    Var(usize),
    Const(bool),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn var(i: usize) -> Self {
        Formula::Var(i)
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    /// Gate levels: AND, OR and NOT each add one; inputs and constants are 0.
    pub fn depth(&self) -> u32 {
        match self {
            Formula::Var(_) | Formula::Const(_) => 0,
            Formula::Not(a) => 1 + a.depth(),
            Formula::And(a, b) | Formula::Or(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn gates(&self) -> usize {
        match self {
            Formula::Var(_) | Formula::Const(_) => 0,
            Formula::Not(a) => 1 + a.gates(),
            Formula::And(a, b) | Formula::Or(a, b) => 1 + a.gates() + b.gates(),
        }
    }

    /// Largest variable index used (0 for closed formulas).
    pub fn num_vars(&self) -> usize {
        match self {
            Formula::Var(i) => *i,
            Formula::Const(_) => 0,
            Formula::Not(a) => a.num_vars(),
            Formula::And(a, b) | Formula::Or(a, b) => a.num_vars().max(b.num_vars()),
        }
    }

    /// Evaluates with `inputs[i - 1]` bound to `x_i`.
    pub fn eval(&self, inputs: &[bool]) -> Result<bool> {
        let n = self.num_vars();
        if n > inputs.len() {
            return Err(Error::InvalidParameter(format!("variable x{n} is unbound")));
        }
        Ok(self.eval_bound(inputs))
    }

    fn eval_bound(&self, inputs: &[bool]) -> bool {
        match self {
            Formula::Var(i) => inputs[i - 1],
            Formula::Const(c) => *c,
            Formula::Not(a) => !a.eval_bound(inputs),
            Formula::And(a, b) => a.eval_bound(inputs) && b.eval_bound(inputs),
            Formula::Or(a, b) => a.eval_bound(inputs) || b.eval_bound(inputs),
        }
    }

    pub fn parse(src: &str) -> Result<Self> {
        let tokens = tokenize(src);
        let mut pos = 0;
        let f = parse_expr(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::Parse(format!("trailing input after formula: {:?}", tokens[pos..].join(" "))));
        }
        Ok(f)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Var(i) => write!(f, "x{i}"),
            Formula::Const(c) => write!(f, "{}", *c as u8),
            Formula::Not(a) => write!(f, "(not {a})"),
            Formula::And(a, b) => write!(f, "(and {a} {b})"),
            Formula::Or(a, b) => write!(f, "(or {a} {b})"),
        }
    }
}

impl std::str::FromStr for Formula {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Formula::parse(s)
    }
}

fn tokenize(src: &str) -> Vec<String> {
    src.replace('(', " ( ").replace(')', " ) ").split_whitespace().map(str::to_lowercase).collect()
}

fn parse_expr(tokens: &[String], pos: &mut usize) -> Result<Formula> {
    let tok = tokens.get(*pos).ok_or_else(|| Error::Parse("unexpected end of formula".into()))?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let op = tokens.get(*pos).ok_or_else(|| Error::Parse("missing operator".into()))?.clone();
            *pos += 1;
            let f = match op.as_str() {
                "not" => Formula::not(parse_expr(tokens, pos)?),
                "and" | "or" => {
                    let a = parse_expr(tokens, pos)?;
                    let b = parse_expr(tokens, pos)?;
                    if op == "and" {
                        Formula::and(a, b)
                    } else {
                        Formula::or(a, b)
                    }
                }
                other => return Err(Error::Parse(format!("unknown operator {other:?}"))),
            };
            match tokens.get(*pos).map(String::as_str) {
                Some(")") => {
                    *pos += 1;
                    Ok(f)
                }
                _ => Err(Error::Parse(format!("expected ')' after ({op} ...)"))),
            }
        }
        "0" | "false" => Ok(Formula::Const(false)),
        "1" | "true" => Ok(Formula::Const(true)),
        t => {
            let i: usize = t
                .strip_prefix('x')
                .and_then(|n| n.parse().ok())
                .filter(|&i| i >= 1)
                .ok_or_else(|| Error::Parse(format!("unexpected token {t:?}")))?;
            Ok(Formula::Var(i))
        }
    }
}

/// Shape limits for [`random_formula`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormulaLimits {
    pub vars: usize,
    pub max_gates: usize,
    pub max_depth: u32,
    pub use_or: bool,
    pub use_consts: bool,
}

/// A random formula within the limits. Leaves are variables drawn uniformly
/// from `x1..x{vars}` (occasionally constants when allowed).
pub fn random_formula(rng: &mut StreamRng, limits: &FormulaLimits) -> Formula {
    let mut budget = limits.max_gates;
    grow(rng, limits, limits.max_depth, &mut budget)
}

fn grow(rng: &mut StreamRng, lim: &FormulaLimits, depth: u32, budget: &mut usize) -> Formula {
    // Stop with probability 1/4 once below the root, always when out of room.
    if depth == 0 || *budget == 0 || (depth < lim.max_depth && rng.chance(1, 4)) {
        if lim.use_consts && rng.chance(1, 10) {
            return Formula::Const(rng.chance(1, 2));
        }
        return Formula::Var(1 + rng.below(lim.vars.max(1) as u64) as usize);
    }
    *budget -= 1;
    let kinds = if lim.use_or { 3 } else { 2 };
    match rng.below(kinds) {
        0 => Formula::not(grow(rng, lim, depth - 1, budget)),
        1 => {
            let a = grow(rng, lim, depth - 1, budget);
            Formula::and(a, grow(rng, lim, depth - 1, budget))
        }
        _ => {
            let a = grow(rng, lim, depth - 1, budget);
            Formula::or(a, grow(rng, lim, depth - 1, budget))
        }
    }
}

/// All `2^n` assignments of `n` inputs, input 1 in the lowest bit.
pub fn assignments(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0..1u64 << n).map(move |mask| (0..n).map(|i| mask >> i & 1 == 1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedSpec;

    #[test]
    fn parse_and_print() {
        let f = Formula::parse("(and x1 (not x2))").unwrap();
        assert_eq!(f, Formula::and(Formula::var(1), Formula::not(Formula::var(2))));
        assert_eq!(f.to_string(), "(and x1 (not x2))");
        assert_eq!(Formula::parse(&f.to_string()).unwrap(), f);
        assert_eq!(Formula::parse("(OR x3 1)").unwrap().num_vars(), 3);
        for bad in ["(and x1)", "(xor x1 x2)", "x0", "(not x1", "x1 x2", ""] {
            assert!(Formula::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn evaluation() {
        let f = Formula::parse("(or (and x1 x2) (not x3))").unwrap();
        assert!(f.eval(&[true, true, true]).unwrap());
        assert!(!f.eval(&[true, false, true]).unwrap());
        assert!(f.eval(&[false, false, false]).unwrap());
        assert!(f.eval(&[true, true]).is_err());
        assert_eq!(f.depth(), 2);
        assert_eq!(f.gates(), 3);
    }

    #[test]
    fn random_respects_limits() {
        let mut rng = StreamRng::new(&SeedSpec::new(4, "formula"));
        let lim = FormulaLimits { vars: 5, max_gates: 12, max_depth: 6, use_or: true, use_consts: true };
        for _ in 0..200 {
            let f = random_formula(&mut rng, &lim);
            assert!(f.gates() <= 12);
            assert!(f.depth() <= 6);
            assert!(f.num_vars() <= 5);
        }
    }

    #[test]
    fn assignment_enumeration() {
        let all: Vec<_> = assignments(2).collect();
        assert_eq!(all, vec![vec![false, false], vec![true, false], vec![false, true], vec![true, true]]);
    }
}
