//! Pearson chi-square tests and binomial standard errors.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub alpha: f64,
}

impl ChiSquareTest {
    fn new(statistic: f64, df: usize, alpha: f64) -> Result<Self> {
        if df == 0 {
            return Err(Error::InvalidParameter("chi-square test with zero degrees of freedom".into()));
        }
        let dist = ChiSquared::new(df as f64).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(ChiSquareTest { statistic, df, p_value: dist.sf(statistic), alpha })
    }

    pub fn rejects(&self) -> bool {
        self.p_value < self.alpha
    }

    /// The statistic above which the test rejects.
    pub fn critical(&self) -> f64 {
        ChiSquared::new(self.df as f64).unwrap().inverse_cdf(1.0 - self.alpha)
    }
}

/// Homogeneity of two count vectors over the same cells. Cells empty in
/// both samples are dropped.
pub fn two_sample_chi_square(a: &[u64], b: &[u64], alpha: f64) -> Result<ChiSquareTest> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch { expected: a.len(), got: b.len() });
    }
    let na = a.iter().sum::<u64>() as f64;
    let nb = b.iter().sum::<u64>() as f64;
    let mut stat = 0.0;
    let mut cells = 0;
    for (&x, &y) in a.iter().zip(b) {
        let tot = (x + y) as f64;
        if tot == 0.0 {
            continue;
        }
        cells += 1;
        let ea = tot * na / (na + nb);
        let eb = tot * nb / (na + nb);
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    ChiSquareTest::new(stat, cells.max(1) - 1, alpha)
}

/// Goodness of fit of `counts` to the law `probs`. Cells with zero
/// probability must be empty.
pub fn goodness_of_fit(counts: &[u64], probs: &[f64], alpha: f64) -> Result<ChiSquareTest> {
    if counts.len() != probs.len() {
        return Err(Error::SizeMismatch { expected: probs.len(), got: counts.len() });
    }
    let n = counts.iter().sum::<u64>() as f64;
    let mut stat = 0.0;
    let mut cells = 0;
    for (&c, &p) in counts.iter().zip(probs) {
        if p == 0.0 {
            if c > 0 {
                return Ok(ChiSquareTest { statistic: f64::INFINITY, df: cells.max(1), p_value: 0.0, alpha });
            }
            continue;
        }
        cells += 1;
        let e = n * p;
        stat += (c as f64 - e).powi(2) / e;
    }
    ChiSquareTest::new(stat, cells.max(1) - 1, alpha)
}

/// `sqrt(p (1 - p) / n)`
pub fn binomial_stderr(p: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
