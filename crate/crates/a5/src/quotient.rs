//! The 16-label conjugacy-class model.
//!
//! Lumping the pair model by `(class(σ), class(σ'))` gives a Markov chain
//! on class pairs because the distribution of a child's class pair depends
//! only on its parent's class pair. [`quotient_channel`] builds the 16x16
//! matrix by enumerating factorizations and refuses to return it if that
//! condition fails for any of the 3600 pair labels.

use std::sync::OnceLock;

use bcast_core::error::{Error, Result};
use bcast_core::gen::generate_direct;
use bcast_core::rational::rat;
use bcast_core::{Channel, LabelArray, Rational, SeedSpec, TreeShape};

use crate::group::{Class, Elem};
use crate::pair::{ClassPair, PairLabel, CLASS_PAIR_LABELS};

/// `counts[a][b]` = number of `σ'` with `class(σ') = a` and
/// `class(σ'⁻¹σ) = b`, i.e. factorizations `σ = σ'σ''` by class pair.
pub fn split_counts(sigma: Elem) -> [[u32; 4]; 4] {
    let mut c = [[0; 4]; 4];
    for s1 in Elem::all() {
        let s2 = s1.inv().mul(sigma);
        c[s1.class() as usize][s2.class() as usize] += 1;
    }
    c
}

/// Child class-pair law of a pair label, in units of 1/180.
pub fn child_class_masses(parent: PairLabel) -> [u32; 16] {
    let a = split_counts(parent.first);
    let b = split_counts(parent.second);
    let mut out = [0; 16];
    for i in 0..4 {
        for j in 0..4 {
            out[i * 4 + j] = 2 * a[i][j] + b[i][j];
        }
    }
    out
}

fn representative(c: Class) -> Elem {
    Elem::all().find(|g| g.class() == c).unwrap()
}

/// Checks that every member of every part has the same child class-pair law
/// as its part's representative. Returns the 16 representative laws.
pub fn lumpability_check() -> Result<Vec<[u32; 16]>> {
    let reps: Vec<[u32; 16]> = ClassPair::all()
        .map(|cp| child_class_masses(PairLabel::new(representative(cp.first), representative(cp.second))))
        .collect();
    for label in PairLabel::all() {
        let part = label.classes().code() as usize;
        if child_class_masses(label) != reps[part] {
            return Err(Error::InvalidChannel(format!(
                "pair label {} breaks lumpability of part {part}",
                label.code()
            )));
        }
    }
    Ok(reps)
}

/// The exact 16x16 class-pair channel.
pub fn quotient_channel() -> Result<Channel> {
    let reps = lumpability_check()?;
    let rows: Vec<Vec<Rational>> = (0..CLASS_PAIR_LABELS)
        .map(|child| (0..CLASS_PAIR_LABELS).map(|parent| rat(reps[parent][child] as i64, 180)).collect())
        .collect();
    Channel::from_rows(rows)
}

fn cached_channel() -> Result<&'static Channel> {
    static CH: OnceLock<std::result::Result<Channel, String>> = OnceLock::new();
    CH.get_or_init(|| quotient_channel().map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|e| Error::InvalidChannel(e.clone()))
}

/// True when all columns of `m * m` are equal, computed exactly.
pub fn square_has_identical_columns(m: &Channel) -> Result<bool> {
    let sq = m.compose(m)?;
    let first = sq.column(0).to_vec();
    Ok((1..sq.m()).all(|j| sq.column(j) == first.as_slice()))
}

/// Broadcast on class pairs; the root is uniform over the 16 labels unless
/// given.
pub fn generate_class_model(shape: &TreeShape, seed: &SeedSpec, root: Option<ClassPair>) -> Result<LabelArray<u8>> {
    generate_direct(shape, cached_channel()?, seed, root.map(|r| r.code() as usize))
}

#[cfg(test)]
mod tests {
    use super::*;
    use bcast_core::estimators::ks_parameter;
    use num::{One, Zero};

    #[test]
    fn identity_parent_gives_diagonal_class_sizes() {
        let ch = quotient_channel().unwrap();
        let p = ClassPair::new(Class::Identity, Class::Identity).code() as usize;
        for c in ClassPair::all() {
            let expect = if c.first == c.second { rat(c.first.size() as i64, 60) } else { Rational::zero() };
            assert_eq!(ch.prob(c.code() as usize, p), &expect, "{c:?}");
        }
    }

    #[test]
    fn identity_first_child_probabilities() {
        let ch = quotient_channel().unwrap();
        for s in Class::ALL {
            for s2 in Class::ALL {
                if s == s2 {
                    continue;
                }
                let p = ClassPair::new(s, s2).code() as usize;
                let c1 = ClassPair::new(Class::Identity, s).code() as usize;
                let c2 = ClassPair::new(Class::Identity, s2).code() as usize;
                assert_eq!(ch.prob(c1, p), &rat(1, 90));
                assert_eq!(ch.prob(c2, p), &rat(1, 180));
            }
        }
    }

    #[test]
    fn column_stochastic_and_rank_one_square() {
        let ch = quotient_channel().unwrap();
        for j in 0..16 {
            assert!(ch.column(j).iter().sum::<Rational>().is_one());
        }
        assert!(square_has_identical_columns(&ch).unwrap());
        for k in [1, 2, 10, 6000] {
            assert!(ks_parameter(&ch, k).unwrap().abs() < 1e-9);
        }
    }
}
