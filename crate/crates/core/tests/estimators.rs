use bcast_core::estimators::{
    estimate_flip_rate, estimate_p_sd, estimate_p_sd_mc, exact_majority_error, exact_p_sd, ks_parameter, linearized_bp,
    majority_by_counts, majority_estimate, reduced_depth, run_binary_trials, Estimator, FlipRate, LinearizedBp,
};
use bcast_core::joint::{bayes_accuracy, enumerate_joint};
use bcast_core::labels::config_from_index;
use bcast_core::rational::{from_f64, int, rat, to_f64};
use bcast_core::{Channel, Rational, SeedSpec, TreeShape};
use num::Zero;

/// `P[majority != root]` from the enumeration oracle, ties counted as 1/2.
fn majority_error_by_enumeration(k: usize, h: u32, theta: &Rational) -> Rational {
    let shape = TreeShape::new(k, h).unwrap();
    let j = enumerate_joint(&shape, &Channel::binary(theta.clone()).unwrap()).unwrap();
    let mut err = Rational::zero();
    for x in 0..j.configs() {
        let ones = x.count_ones() as usize;
        let n = shape.n();
        if 2 * ones < n {
            err += &j.cond[1][x];
        } else if 2 * ones == n {
            err += &j.cond[1][x] / int(2);
        }
    }
    err
}

#[test]
fn exact_majority_error_matches_enumeration() {
    for (k, h, th) in [(2, 4, rat(9, 10)), (3, 2, rat(1, 2)), (2, 3, rat(3, 5)), (4, 2, rat(1, 4))] {
        let oracle = to_f64(&majority_error_by_enumeration(k, h, &th));
        let dp = exact_majority_error(k, h, to_f64(&th));
        assert!((oracle - dp).abs() < 1e-12, "k={k} h={h}: {oracle} vs {dp}");
    }
}

#[test]
fn flip_rate_estimate_within_three_stderr_of_oracle() {
    // k=2, theta=0.9, subtrees of depth 4.
    let shape = TreeShape::new(2, 4).unwrap();
    let est = estimate_flip_rate(&shape, 0.9, 0, 50_000, &SeedSpec::new(17, "flip")).unwrap();
    let oracle = to_f64(&majority_error_by_enumeration(2, 4, &from_f64(0.9).unwrap()));
    assert!((est.estimate - oracle).abs() <= 3.0 * est.stderr, "{} vs {oracle}", est.estimate);
    assert!(est.bound.is_none());
}

#[test]
fn flip_rate_bound_holds_when_applicable() {
    let shape = TreeShape::new(10, 3).unwrap();
    let est = estimate_flip_rate(&shape, 0.6, 0, 20_000, &SeedSpec::new(3, "flip")).unwrap();
    let bound = est.bound.unwrap();
    assert!((bound - 1.0 / 2.6).abs() < 1e-12);
    assert!(est.estimate <= bound + 3.0 * est.stderr);
    let exact = estimate_flip_rate(&TreeShape::new(3, 3).unwrap(), 1.0, 0, 1000, &SeedSpec::new(1, "f")).unwrap();
    assert_eq!(exact.estimate, 0.0);
}

#[test]
fn p_sd_noise_free_equals_bayes_accuracy() {
    for (k, d) in [(2, 2), (3, 2), (2, 3)] {
        let shape = TreeShape::new(k, d).unwrap();
        let th = rat(3, 5);
        let j = enumerate_joint(&shape, &Channel::binary(th.clone()).unwrap()).unwrap();
        assert_eq!(exact_p_sd(&shape, &th, &int(0)).unwrap(), bayes_accuracy(&j));
        assert_eq!(exact_p_sd(&shape, &th, &rat(1, 2)).unwrap(), rat(1, 2));
    }
}

#[test]
fn p_sd_nonincreasing_in_noise() {
    let shape = TreeShape::new(2, 3).unwrap();
    let th = from_f64(0.9).unwrap();
    let mut prev = int(1);
    for i in 0..=5 {
        let v = exact_p_sd(&shape, &th, &rat(i, 10)).unwrap();
        assert!(v <= prev, "s = {i}/10");
        prev = v;
    }
}

#[test]
fn p_sd_monte_carlo_agrees_with_exact() {
    let shape = TreeShape::new(2, 3).unwrap();
    for s in [0.0, 0.2, 0.5] {
        let mc = estimate_p_sd_mc(&shape, 0.9, s, 20_000, &SeedSpec::new(41, "psd")).unwrap();
        let ex = to_f64(&exact_p_sd(&shape, &from_f64(0.9).unwrap(), &from_f64(s).unwrap()).unwrap());
        assert!((mc.accuracy - ex).abs() <= 3.0 * mc.stderr + 1e-12, "s={s}: {} vs {ex}", mc.accuracy);
    }
    let auto = estimate_p_sd(&shape, 0.9, 0.1, 100, &SeedSpec::new(1, "psd")).unwrap();
    assert!(auto.exact.is_some());
}

#[test]
fn majority_misclassification_below_bound_small() {
    let shape = TreeShape::new(10, 4).unwrap();
    let r = majority_by_counts(&shape, 0.6, 5_000, &SeedSpec::new(2, "maj")).unwrap();
    let err = 1.0 - r.accuracy;
    assert!(err <= 1.0 / 2.6 + 3.0 * r.stderr);
}

#[test]
fn counts_and_trees_agree_for_majority() {
    let shape = TreeShape::new(3, 5).unwrap();
    let by_counts = majority_by_counts(&shape, 0.7, 20_000, &SeedSpec::new(8, "maj")).unwrap();
    let by_trees = run_binary_trials(&shape, 0.7, 20_000, &SeedSpec::new(8, "maj"), &[Estimator::Majority]).unwrap();
    let se = (by_counts.stderr.powi(2) + by_trees[0].stderr.powi(2)).sqrt();
    assert!((by_counts.accuracy - by_trees[0].accuracy).abs() <= 3.0 * se);
}

#[test]
fn linearized_reduces_to_majority_on_tiny_trees() {
    let shape = TreeShape::new(2, 1).unwrap();
    assert_eq!(reduced_depth(&shape), 0);
    for x in 0..4 {
        let leaves = config_from_index(x, 2, 2);
        for t in 0..8 {
            let seed = SeedSpec::new(t, "trial");
            let lin = linearized_bp(&shape, 0.5, &leaves, &seed, None).unwrap();
            let lb = LinearizedBp::new(&shape, 0.5, FlipRate::Exact, &seed).unwrap();
            assert_eq!(lin, lb.majorities(&leaves, &seed)[0]);
            if x == 0 || x == 3 {
                assert_eq!(lin, majority_estimate(&leaves, &seed));
            }
        }
    }
}

#[test]
fn bp_is_not_beaten_by_other_estimators() {
    let shape = TreeShape::new(3, 5).unwrap();
    let lin = LinearizedBp::new(&shape, 0.65, FlipRate::Exact, &SeedSpec::new(0, "x")).unwrap();
    let reps = run_binary_trials(
        &shape,
        0.65,
        5_000,
        &SeedSpec::new(12, "opt"),
        &[Estimator::Bp, Estimator::Majority, Estimator::LinearizedBp(lin)],
    )
    .unwrap();
    for r in &reps[1..] {
        let se = (r.stderr.powi(2) + reps[0].stderr.powi(2)).sqrt();
        assert!(r.accuracy <= reps[0].accuracy + 3.0 * se, "{} beat bp", r.estimator);
    }
}

#[test]
fn independent_and_perfect_channels() {
    let shape = TreeShape::new(4, 3).unwrap();
    let reps =
        run_binary_trials(&shape, 0.0, 4_000, &SeedSpec::new(5, "z"), &[Estimator::Bp, Estimator::Majority]).unwrap();
    for r in reps {
        assert!((r.accuracy - 0.5).abs() <= 3.0 * r.stderr);
    }
}

#[test]
fn ks_examples() {
    assert!((ks_parameter(&Channel::binary(from_f64(0.6).unwrap()).unwrap(), 10).unwrap() - 3.6).abs() < 1e-9);
    for k in [1, 5, 12] {
        assert!((ks_parameter(&Channel::identity(4).unwrap(), k).unwrap() - k as f64).abs() < 1e-9);
    }
    let bad = Channel::binary(rat(1, 2)).unwrap();
    assert!(ks_parameter(&bad, 3).is_ok());
}
