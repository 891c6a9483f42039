//! Column-stochastic transmission matrices.

use num::{BigRational, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{fixed_point, format_rational, from_f64, int, parse_fraction, rat, to_f64};

/// `M[i][j] = P[child = i | parent = j]` over `m` labels, held exactly.
///
/// Sampling goes through per-column cumulative 64-bit fixed-point tables; each
/// threshold is within `2^-64` of the exact cumulative mass. That rounding is
/// the only approximation anywhere in generation.
#[derive(Debug, Clone)]
pub struct Channel {
    m: usize,
    // column-major: entries[j * m + i] = M[i][j]
    entries: Vec<BigRational>,
    theta: Option<BigRational>,
    cumulative: Vec<u128>,
}

impl PartialEq for Channel {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.entries == other.entries
    }
}

impl Channel {
    /// Builds from rows: `rows[i][j] = P[child = i | parent = j]`.
    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::InvalidChannel("empty matrix".into()));
        }
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidChannel("matrix is not square".into()));
        }
        let mut entries = vec![BigRational::zero(); m * m];
        for (i, row) in rows.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                entries[j * m + i] = v;
            }
        }
        Self::from_columns_flat(m, entries, None)
    }

    fn from_columns_flat(m: usize, entries: Vec<BigRational>, theta: Option<BigRational>) -> Result<Self> {
        validate(m, &entries)?;
        let mut cumulative = Vec::with_capacity(m * m);
        for j in 0..m {
            let mut acc = BigRational::zero();
            for i in 0..m {
                acc += &entries[j * m + i];
                cumulative.push(if i + 1 == m { 1u128 << 64 } else { fixed_point(&acc) });
            }
        }
        Ok(Channel { m, entries, theta, cumulative })
    }

    /// The symmetric binary channel `theta * I + (1 - theta)/2 * J`.
    pub fn binary(theta: BigRational) -> Result<Self> {
        if theta.abs() > BigRational::one() {
            return Err(Error::InvalidChannel(format!("theta = {theta} outside [-1, 1]")));
        }
        let stay = (BigRational::one() + &theta) / int(2);
        let flip = (BigRational::one() - &theta) / int(2);
        let entries = vec![stay.clone(), flip.clone(), flip, stay];
        Self::from_columns_flat(2, entries, Some(theta))
    }

    /// Binary channel from the exact binary value of a float.
    pub fn binary_f64(theta: f64) -> Result<Self> {
        Self::binary(from_f64(theta)?)
    }

    /// Symmetric flip with probability `s` (the leaf noise channel).
    pub fn flip(s: &BigRational) -> Result<Self> {
        Self::binary(BigRational::one() - s * int(2))
    }

    pub fn identity(m: usize) -> Result<Self> {
        let rows = (0..m).map(|i| (0..m).map(|j| if i == j { int(1) } else { int(0) }).collect()).collect();
        Self::from_rows(rows)
    }

    pub fn uniform(m: usize) -> Result<Self> {
        let rows = (0..m).map(|_| (0..m).map(|_| rat(1, m as i64)).collect()).collect();
        Self::from_rows(rows)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `theta` for channels built with [`Channel::binary`].
    pub fn theta(&self) -> Option<&BigRational> {
        self.theta.as_ref()
    }

    pub fn binary_theta(&self) -> Result<&BigRational> {
        self.theta.as_ref().ok_or(Error::NotBinary(self.m))
    }

    /// `P[child = child | parent = parent]`.
    pub fn prob(&self, child: usize, parent: usize) -> &BigRational {
        &self.entries[parent * self.m + child]
    }

    pub fn column(&self, parent: usize) -> &[BigRational] {
        &self.entries[parent * self.m..(parent + 1) * self.m]
    }

    pub fn rows(&self) -> Vec<Vec<BigRational>> {
        (0..self.m).map(|i| (0..self.m).map(|j| self.prob(i, j).clone()).collect()).collect()
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.m).map(|i| (0..self.m).map(|j| to_f64(self.prob(i, j))).collect()).collect()
    }

    /// Re-checks the stochastic invariants.
    pub fn validate(&self) -> Result<()> {
        validate(self.m, &self.entries)
    }

    /// Draws a child label for `parent` from one uniform 64-bit word.
    #[inline]
    pub fn sample(&self, parent: usize, word: u64) -> usize {
        let col = &self.cumulative[parent * self.m..(parent + 1) * self.m];
        let u = word as u128;
        col.iter().position(|&c| u < c).unwrap_or(self.m - 1)
    }

    /// Matrix product `self * other` (apply `other` first, then `self`).
    pub fn compose(&self, other: &Channel) -> Result<Channel> {
        if self.m != other.m {
            return Err(Error::SizeMismatch { expected: self.m, got: other.m });
        }
        let m = self.m;
        let mut entries = vec![BigRational::zero(); m * m];
        for j in 0..m {
            for i in 0..m {
                let mut acc = BigRational::zero();
                for l in 0..m {
                    acc += self.prob(i, l) * other.prob(l, j);
                }
                entries[j * m + i] = acc;
            }
        }
        Self::from_columns_flat(m, entries, None)
    }

    /// The unique stationary distribution `v` (`M v = v`, `sum v = 1`), solved
    /// exactly; `None` when it is not unique.
    pub fn stationary(&self) -> Option<Vec<BigRational>> {
        let m = self.m;
        // Rows of (M - I) with the last replaced by all-ones, right side e_m.
        let mut a: Vec<Vec<BigRational>> = (0..m)
            .map(|i| {
                let mut row: Vec<BigRational> = (0..m).map(|j| self.prob(i, j).clone()).collect();
                row[i] -= BigRational::one();
                row.push(BigRational::zero());
                row
            })
            .collect();
        a[m - 1] = vec![BigRational::one(); m + 1];
        for col in 0..m {
            let pivot = (col..m).find(|&r| !a[r][col].is_zero())?;
            a.swap(col, pivot);
            let p = a[col][col].clone();
            for x in a[col].iter_mut() {
                *x /= &p;
            }
            for r in 0..m {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    let pivot_row = a[col].clone();
                    for (x, y) in a[r].iter_mut().zip(pivot_row) {
                        *x -= &f * y;
                    }
                }
            }
        }
        Some(a.into_iter().map(|row| row[m].clone()).collect())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<String>> =
            (0..self.m).map(|i| (0..self.m).map(|j| format_rational(self.prob(i, j))).collect()).collect();
        serde_json::json!({ "m": self.m, "rows": rows })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize, Serialize)]
        struct Repr {
            rows: Vec<Vec<String>>,
        }
        let r: Repr = serde_json::from_value(v.clone())?;
        let rows = r
            .rows
            .iter()
            .map(|row| row.iter().map(|s| parse_fraction(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }
}

fn validate(m: usize, entries: &[BigRational]) -> Result<()> {
    if entries.len() != m * m {
        return Err(Error::InvalidChannel("wrong entry count".into()));
    }
    for j in 0..m {
        let col = &entries[j * m..(j + 1) * m];
        if let Some(v) = col.iter().find(|v| v.is_negative()) {
            return Err(Error::InvalidChannel(format!("negative entry {v} in column {j}")));
        }
        let sum: BigRational = col.iter().sum();
        if !sum.is_one() {
            return Err(Error::InvalidChannel(format!("column {j} sums to {sum}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_columns() {
        let c = Channel::binary(rat(1, 2)).unwrap();
        assert_eq!(c.prob(1, 1), &rat(3, 4));
        assert_eq!(c.prob(0, 1), &rat(1, 4));
        assert_eq!(c.theta(), Some(&rat(1, 2)));
    }

    #[test]
    fn rejects_non_stochastic() {
        let bad = vec![vec![rat(1, 2), rat(1, 2)], vec![rat(1, 3), rat(1, 2)]];
        assert!(matches!(Channel::from_rows(bad), Err(Error::InvalidChannel(_))));
        let neg = vec![vec![rat(3, 2), int(0)], vec![rat(-1, 2), int(1)]];
        assert!(Channel::from_rows(neg).is_err());
        assert!(Channel::binary(rat(3, 2)).is_err());
    }

    #[test]
    fn sampling_edges() {
        let c = Channel::binary(int(1)).unwrap();
        for w in [0, 1, u64::MAX / 2, u64::MAX] {
            assert_eq!(c.sample(1, w), 1);
            assert_eq!(c.sample(0, w), 0);
        }
        let c = Channel::binary(rat(1, 2)).unwrap();
        // column 1: P[0] = 1/4, P[1] = 3/4
        assert_eq!(c.sample(1, (1u64 << 62) - 1), 0);
        assert_eq!(c.sample(1, 1u64 << 62), 1);
    }

    #[test]
    fn flip_channel() {
        let f = Channel::flip(&rat(1, 10)).unwrap();
        assert_eq!(f.prob(0, 1), &rat(1, 10));
        assert_eq!(f.prob(1, 1), &rat(9, 10));
    }

    #[test]
    fn composition_of_binary_channels_multiplies_theta() {
        let a = Channel::binary(rat(1, 2)).unwrap();
        let b = Channel::binary(rat(1, 3)).unwrap();
        let ab = a.compose(&b).unwrap();
        let expect = Channel::binary(rat(1, 6)).unwrap();
        assert_eq!(ab, expect);
    }

    #[test]
    fn stationary_distributions() {
        let c = Channel::binary(rat(1, 3)).unwrap();
        assert_eq!(c.stationary().unwrap(), vec![rat(1, 2), rat(1, 2)]);
        let skew = Channel::from_rows(vec![vec![rat(1, 2), rat(1, 4)], vec![rat(1, 2), rat(3, 4)]]).unwrap();
        assert_eq!(skew.stationary().unwrap(), vec![rat(1, 3), rat(2, 3)]);
        assert!(Channel::identity(3).unwrap().stationary().is_none());
    }

    #[test]
    fn json_round_trip() {
        let c = Channel::binary(rat(2, 7)).unwrap();
        let back = Channel::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }
}
