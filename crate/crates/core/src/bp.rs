//! Belief propagation on regular trees.
//!
//! Upward messages `L_v[a] = P[evidence below v | v = a]` are combined as
//! `L_u[a] = prod_c sum_b M[b][a] L_c[b]`, and the root posterior under a
//! uniform prior is `L_root` normalised. Three arithmetic paths:
//!
//! - rational: integer-scaled messages (channel and leaf weights multiplied
//!   by their common denominators, each message divided by its gcd), exact;
//! - float: log-domain messages, any `m`;
//! - [`binary_log_odds`]: the symmetric binary fast path, one log-odds per
//!   node propagated through `g(h) = 2 atanh(theta tanh(h / 2))`.

use std::str::FromStr;

use num::bigint::BigInt;
use num::integer::Integer;
use num::{BigRational, One, Signed, Zero};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::joint::{config_count, EnumerationConfig};
use crate::labels::LabelCode;
use crate::rational::{format_rational, to_f64};
use crate::tree::TreeShape;

// Float log-odds this close to zero count as a tie.
pub const FLOAT_TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Float,
    Rational,
    /// Rational when the leaf configuration count fits the enumeration cap.
    Auto,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "float" => Ok(Mode::Float),
            "rational" => Ok(Mode::Rational),
            "auto" => Ok(Mode::Auto),
            _ => Err(Error::Parse(format!("unknown mode {s:?}"))),
        }
    }
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Float => "float",
            Mode::Rational => "rational",
            Mode::Auto => "auto",
        }
    }
}

/// Per-leaf likelihood weights `w_i[a] = P[observation_i | leaf_i = a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafLikelihood {
    m: usize,
    weights: Vec<BigRational>,
}

impl LeafLikelihood {
    pub fn new(m: usize, weights: Vec<Vec<BigRational>>) -> Result<Self> {
        let mut flat = Vec::with_capacity(weights.len() * m);
        for (leaf, w) in weights.into_iter().enumerate() {
            if w.len() != m {
                return Err(Error::SizeMismatch { expected: m, got: w.len() });
            }
            if w.iter().any(|x| x.is_negative()) {
                return Err(Error::InvalidParameter(format!("negative likelihood at leaf {leaf}")));
            }
            if w.iter().all(|x| x.is_zero()) {
                return Err(Error::ZeroLikelihood { leaf });
            }
            flat.extend(w);
        }
        Ok(LeafLikelihood { m, weights: flat })
    }

    /// Leaves observed without noise.
    pub fn observed<L: LabelCode>(leaves: &[L], m: usize) -> Result<Self> {
        let rows = leaves
            .iter()
            .map(|x| {
                let x = x.to_usize();
                if x >= m {
                    return Err(Error::InvalidParameter(format!("label {x} not below m = {m}")));
                }
                Ok((0..m).map(|a| if a == x { BigRational::one() } else { BigRational::zero() }).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(m, rows)
    }

    /// Leaves observed through a noise channel: `w_i[a] = N[x_i][a]`.
    pub fn through_channel<L: LabelCode>(leaves: &[L], noise: &Channel) -> Result<Self> {
        let m = noise.m();
        let rows = leaves
            .iter()
            .map(|x| {
                let x = x.to_usize();
                if x >= m {
                    return Err(Error::InvalidParameter(format!("label {x} not below m = {m}")));
                }
                Ok((0..m).map(|a| noise.prob(x, a).clone()).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(m, rows)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.weights.len() / self.m
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn leaf(&self, i: usize) -> &[BigRational] {
        &self.weights[i * self.m..(i + 1) * self.m]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorReport {
    /// Posterior masses as floats (always present).
    pub masses: Vec<f64>,
    /// Exact masses when computed in rational mode.
    pub exact: Option<Vec<BigRational>>,
    /// The arithmetic actually used (never `Auto`).
    pub mode: Mode,
    pub argmax: usize,
    /// Set when the maximum is shared; `argmax` is then the lowest label.
    pub tie: bool,
}

impl PosteriorReport {
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({
            "mode": self.mode.name(),
            "masses": self.masses,
            "argmax": self.argmax,
            "tie": self.tie,
        });
        if let Some(ex) = &self.exact {
            v["exact"] = serde_json::json!(ex.iter().map(format_rational).collect::<Vec<_>>());
        }
        v
    }
}

pub fn bp_posterior(
    shape: &TreeShape,
    channel: &Channel,
    evidence: &LeafLikelihood,
    mode: Mode,
) -> Result<PosteriorReport> {
    if evidence.len() != shape.n() {
        return Err(Error::SizeMismatch { expected: shape.n(), got: evidence.len() });
    }
    if evidence.m() != channel.m() {
        return Err(Error::SizeMismatch { expected: channel.m(), got: evidence.m() });
    }
    let mode = match mode {
        Mode::Auto => {
            if config_count(shape, channel.m(), EnumerationConfig::default().cap).is_ok() {
                Mode::Rational
            } else {
                Mode::Float
            }
        }
        m => m,
    };
    match mode {
        Mode::Rational => rational_bp(shape, channel, evidence),
        _ => float_bp(shape, channel, evidence),
    }
}

fn lcm_of_denominators<'a>(xs: impl Iterator<Item = &'a BigRational>) -> BigInt {
    xs.fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

fn reduce(v: &mut [BigInt]) {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
}

fn rational_bp(shape: &TreeShape, channel: &Channel, ev: &LeafLikelihood) -> Result<PosteriorReport> {
    let m = channel.m();
    let k = shape.k();
    let scale = lcm_of_denominators((0..m).flat_map(|j| channel.column(j).iter()));
    // mi[a][b] = M[b][a] * scale
    let mi: Vec<Vec<BigInt>> = (0..m)
        .map(|a| (0..m).map(|b| (channel.prob(b, a) * BigRational::from_integer(scale.clone())).to_integer()).collect())
        .collect();

    let mut cur: Vec<Vec<BigInt>> = (0..shape.n())
        .map(|i| {
            let w = ev.leaf(i);
            let s = lcm_of_denominators(w.iter());
            let mut v: Vec<BigInt> =
                w.iter().map(|x| (x * BigRational::from_integer(s.clone())).to_integer()).collect();
            reduce(&mut v);
            v
        })
        .collect();

    for _ in 0..shape.d() {
        cur = cur
            .chunks(k)
            .map(|children| {
                let mut msg: Vec<BigInt> = vec![BigInt::one(); m];
                for child in children {
                    for (a, out) in msg.iter_mut().enumerate() {
                        let s: BigInt = (0..m)
                            .filter(|&b| !child[b].is_zero() && !mi[a][b].is_zero())
                            .map(|b| &mi[a][b] * &child[b])
                            .sum();
                        *out *= s;
                    }
                }
                reduce(&mut msg);
                msg
            })
            .collect();
    }

    let root = &cur[0];
    let total: BigInt = root.iter().sum();
    if total.is_zero() {
        return Err(Error::ImpossibleEvidence);
    }
    let exact: Vec<BigRational> = root.iter().map(|x| BigRational::new(x.clone(), total.clone())).collect();
    let best = exact.iter().max().unwrap().clone();
    let argmax = exact.iter().position(|x| *x == best).unwrap();
    let tie = exact.iter().filter(|x| **x == best).count() > 1;
    Ok(PosteriorReport {
        masses: exact.iter().map(to_f64).collect(),
        exact: Some(exact),
        mode: Mode::Rational,
        argmax,
        tie,
    })
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn float_bp(shape: &TreeShape, channel: &Channel, ev: &LeafLikelihood) -> Result<PosteriorReport> {
    let m = channel.m();
    let k = shape.k();
    // log_m[a][b] = ln M[b][a]
    let log_m: Vec<Vec<f64>> = (0..m).map(|a| (0..m).map(|b| to_f64(channel.prob(b, a)).ln()).collect()).collect();
    let mut cur: Vec<Vec<f64>> = (0..shape.n()).map(|i| ev.leaf(i).iter().map(|w| to_f64(w).ln()).collect()).collect();
    for _ in 0..shape.d() {
        cur = cur
            .chunks(k)
            .map(|children| {
                let mut msg = vec![0.0; m];
                for child in children {
                    for (a, out) in msg.iter_mut().enumerate() {
                        *out += log_sum_exp((0..m).map(|b| log_m[a][b] + child[b]));
                    }
                }
                let norm = log_sum_exp(msg.iter().copied());
                if norm.is_finite() {
                    msg.iter_mut().for_each(|x| *x -= norm);
                }
                msg
            })
            .collect();
    }
    let root = &cur[0];
    let norm = log_sum_exp(root.iter().copied());
    if !norm.is_finite() {
        return Err(Error::ImpossibleEvidence);
    }
    let masses: Vec<f64> = root.iter().map(|x| (x - norm).exp()).collect();
    let best = masses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let argmax = masses.iter().position(|&x| x >= best - FLOAT_TIE_TOLERANCE).unwrap();
    let tie = masses.iter().filter(|&&x| x >= best - FLOAT_TIE_TOLERANCE).count() > 1;
    Ok(PosteriorReport { masses, exact: None, mode: Mode::Float, argmax, tie })
}

/// One edge of the symmetric binary channel in log-odds form.
#[inline]
pub fn edge_log_odds(theta: f64, h: f64) -> f64 {
    if theta.abs() >= 1.0 {
        theta.signum() * h
    } else if h.is_infinite() {
        h.signum() * 2.0 * theta.atanh()
    } else {
        2.0 * (theta * (h / 2.0).tanh()).atanh()
    }
}

/// Root log-odds `ln P[root = 1 | leaves] / P[root = 0 | leaves]` for the
/// symmetric binary channel, with each leaf observed through a symmetric flip
/// of rate `s` (`s = 0` means noiseless). NaN signals contradictory evidence.
pub fn binary_log_odds(shape: &TreeShape, theta: f64, leaves: &[u8], s: f64) -> f64 {
    debug_assert_eq!(leaves.len(), shape.n());
    let leaf_llr = if s <= 0.0 { f64::INFINITY } else { ((1.0 - s) / s).ln() };
    if shape.d() == 0 {
        return if leaves[0] == 1 { leaf_llr } else { -leaf_llr };
    }
    let k = shape.k();
    // Leaves take only two values, so the first edge is a table lookup.
    let up = edge_log_odds(theta, leaf_llr);
    let table = [-up, up];
    let mut cur: Vec<f64> = leaves.chunks(k).map(|c| c.iter().map(|&x| table[x as usize]).sum::<f64>()).collect();
    for _ in 1..shape.d() {
        cur = cur.chunks(k).map(|c| c.iter().map(|&h| edge_log_odds(theta, h)).sum::<f64>()).collect();
    }
    cur[0]
}

/// Root log-odds from arbitrary per-leaf log-likelihood ratios.
pub fn binary_log_odds_from_llr(shape: &TreeShape, theta: f64, llr: &[f64]) -> f64 {
    debug_assert_eq!(llr.len(), shape.n());
    let k = shape.k();
    let mut cur = llr.to_vec();
    for _ in 0..shape.d() {
        cur = cur.chunks(k).map(|c| c.iter().map(|&h| edge_log_odds(theta, h)).sum::<f64>()).collect();
    }
    cur[0]
}

/// Decision from a root log-odds: `(label, tie)`, ties going to label 0.
pub fn decide(h: f64) -> (u8, bool) {
    if h.is_nan() || h.abs() <= FLOAT_TIE_TOLERANCE {
        (0, true)
    } else {
        ((h > 0.0) as u8, false)
    }
}
