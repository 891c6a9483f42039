//! The one-level gadget bound for `k = 6`, `θ = 9/10`.
//!
//! With child posteriors `p_1..p_6`, the parent posterior is
//! `A / (A + B)` where `A = ∏(19/20 p_i + 1/20 (1 - p_i))` and
//! `B = ∏(1/20 p_i + 19/20 (1 - p_i))`.

use bcast_core::error::{Error, Result};
use bcast_core::Rational;
use num::{One, Zero};
use serde::Serialize;

pub fn gadget_posterior_bound(p: &[Rational; 6]) -> Result<Rational> {
    let hi = Rational::new(19.into(), 20.into());
    let lo = Rational::new(1.into(), 20.into());
    let mut a = Rational::one();
    let mut b = Rational::one();
    for pi in p {
        if pi < &Rational::zero() || pi > &Rational::one() {
            return Err(Error::InvalidParameter(format!("posterior {pi} outside [0, 1]")));
        }
        let qi = Rational::one() - pi;
        a *= &hi * pi + &lo * &qi;
        b *= &lo * pi + &hi * &qi;
    }
    Ok(&a / (&a + &b))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridReport {
    /// Every grid point satisfied the bound.
    pub pass: bool,
    pub points: u64,
    pub violations: u64,
    /// Grid point with the smallest posterior (largest for the complement
    /// grid), as fractions `a / steps`.
    pub worst: [f64; 6],
    #[serde(serialize_with = "ser_rational")]
    pub worst_posterior: Rational,
}

pub(crate) fn ser_rational<S: serde::Serializer>(v: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&bcast_core::rational::format_rational(v))
}

/// Grid resolution `1/h`, requiring `h` to be (close to) a unit fraction
/// no larger than 1/20.
fn steps_for(h: f64) -> Result<u64> {
    if !(h > 0.0 && h <= 0.05) {
        return Err(Error::InvalidParameter(format!("grid step {h} outside (0, 0.05]")));
    }
    let n = (1.0 / h).round();
    if (n * h - 1.0).abs() > 1e-9 || n > 10_000.0 {
        return Err(Error::InvalidParameter(format!("grid step {h} is not 1/N for a moderate integer N")));
    }
    Ok(n as u64)
}

/// Sweeps four coordinates over `[0.95, 1]` and two over `[0, 1]` at step
/// `h` (all grid points are `a/N`, `N = 1/h`) and checks the posterior is at
/// least 19/20 everywhere. With `complement`, the four coordinates range over
/// `[0, 0.05]` and the check is posterior at most 1/20.
///
/// Each factor is `(18a + N) / 20N` or its mirror, so the test `A >= 19 B`
/// is done in exact integer arithmetic.
pub fn lemma_grid_check(h: f64, complement: bool) -> Result<GridReport> {
    let n = steps_for(h)?;
    let lo_start = (19 * n).div_ceil(20);
    let high: Vec<u64> = if complement { (0..=n - lo_start).collect() } else { (lo_start..=n).collect() };
    let full: Vec<u64> = (0..=n).collect();
    // factor numerators for child value a/N
    let fa = |a: u64| 18 * a + n;
    let fb = |a: u64| 18 * (n - a) + n;
    let mut points = 0u64;
    let mut violations = 0u64;
    let mut worst = [0u64; 6];
    let mut worst_score = f64::NEG_INFINITY;
    for &a1 in &high {
        for &a2 in &high {
            for &a3 in &high {
                for &a4 in &high {
                    let a4p = fa(a1) as u128 * fa(a2) as u128 * fa(a3) as u128 * fa(a4) as u128;
                    let b4p = fb(a1) as u128 * fb(a2) as u128 * fb(a3) as u128 * fb(a4) as u128;
                    for &a5 in &full {
                        for &a6 in &full {
                            let a = a4p * fa(a5) as u128 * fa(a6) as u128;
                            let b = b4p * fb(a5) as u128 * fb(a6) as u128;
                            points += 1;
                            let ok = if complement { b >= 19 * a } else { a >= 19 * b };
                            violations += (!ok) as u64;
                            // larger is worse: B/A for the main grid, A/B for the complement
                            let score = if complement { a as f64 / b as f64 } else { b as f64 / a as f64 };
                            if score > worst_score {
                                worst_score = score;
                                worst = [a1, a2, a3, a4, a5, a6];
                            }
                        }
                    }
                }
            }
        }
    }
    let frac = |a: u64| Rational::new((a as i64).into(), (n as i64).into());
    let worst_posterior = gadget_posterior_bound(&worst.map(frac))?;
    Ok(GridReport {
        pass: violations == 0,
        points,
        violations,
        worst: worst.map(|a| a as f64 / n as f64),
        worst_posterior,
    })
}
