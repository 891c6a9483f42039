//! Small helpers around `BigRational`.

use num::bigint::{BigInt, Sign};
use num::{BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Exact value of a finite `f64`.
pub fn from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::InvalidParameter(format!("{x} is not finite")))
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Very large numerators/denominators: scale down by bit length.
        let n = x.numer().bits() as i64;
        let d = x.denom().bits() as i64;
        let shift = (n.max(d) - 1000).max(0) as usize;
        let nf = (x.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let df = (x.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        nf / df
    })
}

/// Parses `"3/4"`, `"0.75"`, `"-1"` or `"1e-3"`-free decimals exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{whole}{frac}");
    let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let d = num::pow(BigInt::from(10), frac.len());
    let v = BigRational::new(n, d);
    Ok(if neg { -v } else { v })
}

pub fn format_rational(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Inverse of [`format_rational`]; also accepts plain integers.
pub fn parse_fraction(s: &str) -> Result<BigRational> {
    parse_rational(s)
}

/// `floor(p * 2^64)` for `p` in `[0, 1]`, as a `u128` so that `p = 1` maps to
/// `2^64` exactly. A uniform 64-bit word `u` realises the event `u < result`
/// with probability within `2^-64` of `p`.
pub fn fixed_point(p: &BigRational) -> u128 {
    if p.is_negative() || p.is_zero() {
        return 0;
    }
    if p >= &BigRational::one() {
        return 1u128 << 64;
    }
    let scaled: BigInt = (p.numer() << 64usize) / p.denom();
    let (sign, digits) = scaled.to_u64_digits();
    debug_assert_ne!(sign, Sign::Minus);
    match digits.as_slice() {
        [] => 0,
        [lo] => *lo as u128,
        [lo, hi] => *lo as u128 | (*hi as u128) << 64,
        _ => 1u128 << 64,
    }
}

/// A dyadic rational `num / 2^exp`. The representation need not be reduced;
/// the exact biased-bit sampler consumes `exp + 1` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dyadic {
    pub num: u64,
    pub exp: u32,
}

impl Dyadic {
    /// `num / 2^exp` with `0 <= num / 2^exp < 1`.
    pub fn new(num: u64, exp: u32) -> Result<Self> {
        if exp > 62 {
            return Err(Error::InvalidParameter(format!("dyadic exponent {exp} exceeds 62")));
        }
        if num >= 1u64 << exp {
            return Err(Error::InvalidParameter(format!("{num}/2^{exp} is not below 1")));
        }
        Ok(Dyadic { num, exp })
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::one() << self.exp as usize)
    }
}

impl TryFrom<&BigRational> for Dyadic {
    type Error = Error;

    /// Reduced representation; fails for non-dyadic or out-of-range values.
    fn try_from(x: &BigRational) -> Result<Self> {
        if x.is_negative() || x >= &BigRational::one() {
            return Err(Error::InvalidParameter(format!("theta = {x} must lie in [0, 1)")));
        }
        let den = x.denom();
        let tz = den.trailing_zeros().unwrap_or(0);
        if den != &(BigInt::one() << tz as usize) {
            return Err(Error::NonDyadic(x.to_string()));
        }
        let num = x.numer().to_u64().ok_or_else(|| Error::NonDyadic(x.to_string()))?;
        Dyadic::new(num, tz as u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rational("0.5").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("0.1").unwrap(), rat(1, 10));
        assert_eq!(parse_rational("-0.75").unwrap(), rat(-3, 4));
        assert_eq!(parse_rational("3/9").unwrap(), rat(1, 3));
        assert_eq!(parse_rational("2").unwrap(), int(2));
        assert_eq!(parse_rational(".25").unwrap(), rat(1, 4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1e-3").is_err());
    }

    #[test]
    fn fraction_format_round_trip() {
        let x = rat(-22, 7);
        assert_eq!(format_rational(&x), "-22/7");
        assert_eq!(parse_fraction(&format_rational(&x)).unwrap(), x);
    }

    #[test]
    fn fixed_point_edges() {
        assert_eq!(fixed_point(&int(0)), 0);
        assert_eq!(fixed_point(&int(1)), 1u128 << 64);
        assert_eq!(fixed_point(&rat(1, 2)), 1u128 << 63);
        assert_eq!(fixed_point(&rat(3, 4)), 3u128 << 62);
        let third = fixed_point(&rat(1, 3));
        assert_eq!(third, (u64::MAX / 3) as u128);
    }

    #[test]
    fn dyadic_detection() {
        assert_eq!(Dyadic::try_from(&rat(3, 4)).unwrap(), Dyadic { num: 3, exp: 2 });
        assert_eq!(Dyadic::try_from(&int(0)).unwrap(), Dyadic { num: 0, exp: 0 });
        assert!(matches!(Dyadic::try_from(&rat(1, 3)), Err(Error::NonDyadic(_))));
        assert!(Dyadic::try_from(&int(1)).is_err());
        assert!(Dyadic::new(8, 3).is_err());
        assert_eq!(Dyadic::new(6, 3).unwrap().to_rational(), rat(3, 4));
    }

    #[test]
    fn huge_rationals_to_f64() {
        let big = BigInt::from(3u32).pow(2000);
        let x = BigRational::new(big.clone(), big * BigInt::from(4));
        assert!((to_f64(&x) - 0.25).abs() < 1e-12);
    }
}
