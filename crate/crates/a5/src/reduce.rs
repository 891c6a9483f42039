//! Word-problem reductions: randomizing a word, amplifying a weak product
//! oracle by majority vote, and running a root detector on the product tree
//! of a word.

use bcast_core::error::{Error, Result};
use bcast_core::rng::StreamRng;
use bcast_core::SeedSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::group::{product, Elem, ORDER};
use crate::pair::{generate_pair_model, PairLabel};
use crate::product_tree::{product_tree_generate, root_of_word};
use bcast_core::TreeShape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Promise {
    Identity,
    Target,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordInstance {
    pub word: Vec<Elem>,
    pub promise: Promise,
    pub target: Elem,
}

impl WordInstance {
    pub fn new(word: Vec<Elem>, promise: Promise, target: Elem) -> Result<Self> {
        let w = WordInstance { word, promise, target };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.word.is_empty() {
            return Err(Error::InvalidParameter("empty word".into()));
        }
        if self.target.is_identity() {
            return Err(Error::InvalidParameter("target must differ from the identity".into()));
        }
        if product(&self.word) != self.expected_product() {
            return Err(Error::InvalidParameter(format!("word product does not match promise {:?}", self.promise)));
        }
        Ok(())
    }

    pub fn expected_product(&self) -> Elem {
        match self.promise {
            Promise::Identity => Elem::IDENTITY,
            Promise::Target => self.target,
        }
    }

    /// `r - 1` uniform letters, the last one fixed by the promise.
    pub fn random(r: usize, target: Elem, promise: Promise, rng: &mut StreamRng) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParameter("word length must be at least 1".into()));
        }
        let mut word: Vec<Elem> = (0..r - 1).map(|_| uniform_elem(rng)).collect();
        let want = if promise == Promise::Target { target } else { Elem::IDENTITY };
        word.push(product(&word).inv().mul(want));
        WordInstance::new(word, promise, target)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("word instance serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let w: WordInstance = serde_json::from_value(v.clone())?;
        w.validate()?;
        Ok(w)
    }
}

pub fn uniform_elem(rng: &mut StreamRng) -> Elem {
    Elem::from_index(rng.below(ORDER as u64) as usize)
}

/// `(σ_1 b_1, b_1⁻¹ σ_2 b_2, …, b_{r-1}⁻¹ σ_r b_r)`.
pub fn randomize_with(word: &[Elem], b: &[Elem]) -> Result<Vec<Elem>> {
    if word.len() != b.len() || word.is_empty() {
        return Err(Error::SizeMismatch { expected: word.len().max(1), got: b.len() });
    }
    let mut prev = Elem::IDENTITY;
    Ok(word
        .iter()
        .zip(b)
        .map(|(&s, &bi)| {
            let out = prev.inv().mul(s).mul(bi);
            prev = bi;
            out
        })
        .collect())
}

/// Returns the randomized word and the randomizers `b_1..b_r`.
pub fn randomize_word(word: &[Elem], seed: &SeedSpec) -> Result<(Vec<Elem>, Vec<Elem>)> {
    let mut rng = StreamRng::new(seed);
    let b: Vec<Elem> = (0..word.len()).map(|_| uniform_elem(&mut rng)).collect();
    Ok((randomize_with(word, &b)?, b))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AmplifyOutcome {
    /// `None` when no trial voted or the vote tied.
    pub decision: Option<Promise>,
    pub identity_votes: u64,
    pub target_votes: u64,
    pub trials: u64,
}

impl AmplifyOutcome {
    pub fn undecided(&self) -> bool {
        self.decision.is_none()
    }
}

/// Randomizes the instance `trials` times, asks `oracle` for the product of
/// each randomized word and votes identity on `b_r`, target on `c·b_r`.
pub fn amplify_oracle<O>(oracle: &O, instance: &WordInstance, trials: u64, seed: &SeedSpec) -> Result<AmplifyOutcome>
where
    O: Fn(&[Elem], &mut StreamRng) -> Elem + Sync,
{
    instance.validate()?;
    let (id, tg) = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(u64, u64)> {
            let s = seed.trial(t);
            let (w, b) = randomize_word(&instance.word, &s.with_tag("randomize"))?;
            let br = *b.last().unwrap();
            let guess = oracle(&w, &mut StreamRng::new(&s.with_tag("oracle")));
            Ok(if guess == br {
                (1, 0)
            } else if guess == instance.target.mul(br) {
                (0, 1)
            } else {
                (0, 0)
            })
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    let decision = match id.cmp(&tg) {
        std::cmp::Ordering::Greater => Some(Promise::Identity),
        std::cmp::Ordering::Less => Some(Promise::Target),
        std::cmp::Ordering::Equal => None,
    };
    Ok(AmplifyOutcome { decision, identity_votes: id, target_votes: tg, trials })
}

/// Answers the true product.
pub fn perfect_oracle(word: &[Elem], _: &mut StreamRng) -> Elem {
    product(word)
}

/// Correct with probability `1/60 + advantage`, otherwise a uniformly random
/// wrong element.
pub fn synthetic_oracle(advantage: f64) -> impl Fn(&[Elem], &mut StreamRng) -> Elem + Sync {
    let p = 1.0 / ORDER as f64 + advantage;
    move |word, rng| {
        let truth = product(word);
        if (rng.next_u64() as f64) < p * 18446744073709551616.0 {
            truth
        } else {
            let j = rng.below(ORDER as u64 - 1) as usize;
            Elem::from_index(if j >= truth.index() { j + 1 } else { j })
        }
    }
}

pub fn constant_oracle(g: Elem) -> impl Fn(&[Elem], &mut StreamRng) -> Elem + Sync {
    move |_, _| g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DetectionRecord {
    pub guess: PairLabel,
    pub truth: PairLabel,
    pub correct: bool,
}

/// Builds the product tree of `sigma`, hands its leaves to `detector` and
/// compares the guess with `(∏ first half, ∏ second half)`.
pub fn detection_to_word<D>(detector: &D, sigma: &[Elem], k: usize, d: u32, seed: &SeedSpec) -> Result<DetectionRecord>
where
    D: Fn(&[u16]) -> Result<PairLabel>,
{
    let tree = product_tree_generate(d, sigma, k, seed)?;
    let guess = detector(tree.leaves())?;
    let truth = root_of_word(sigma);
    Ok(DetectionRecord { guess, truth, correct: guess == truth })
}

/// Detector successes over `trials` uniform words through the product tree.
pub fn word_pipeline_successes<D>(detector: &D, k: usize, d: u32, trials: u64, seed: &SeedSpec) -> Result<u64>
where
    D: Fn(&[u16]) -> Result<PairLabel> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| -> Result<u64> {
            let s = seed.trial(t);
            let mut rng = StreamRng::new(&s.with_tag("sigma"));
            let sigma: Vec<Elem> = (0..1usize << (d + 1)).map(|_| uniform_elem(&mut rng)).collect();
            Ok(detection_to_word(detector, &sigma, k, d, &s.with_tag("product-tree"))?.correct as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Detector successes over `trials` pair-model trees with uniform roots.
pub fn pair_model_successes<D>(detector: &D, k: usize, d: u32, trials: u64, seed: &SeedSpec) -> Result<u64>
where
    D: Fn(&[u16]) -> Result<PairLabel> + Sync,
{
    let shape = TreeShape::new(k, d)?;
    (0..trials)
        .into_par_iter()
        .map(|t| -> Result<u64> {
            let tree = generate_pair_model(&shape, &seed.trial(t).with_tag("pair"), None)?;
            Ok((detector(tree.leaves())?.code() == tree.root()) as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}
