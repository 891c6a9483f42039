use bcast_core::gen::{
    add_leaf_noise, approx_threshold, biased_bit_approx_from_bits, biased_bit_from_bits, exact_law_path_product,
    exact_law_restrictions, generate_direct, generate_path_product, generate_via_restrictions, live_inputs_after,
    sample_leaf_count, NoiseSpec,
};
use bcast_core::joint::{enumerate_joint, total_variation, EnumerationConfig};
use bcast_core::rational::{from_f64, int, rat, Dyadic};
use bcast_core::rng::{SeedSpec, StreamRng};
use bcast_core::stats::two_sample_chi_square;
use bcast_core::{Channel, LabelArray, TreeShape};
use num::Zero;

#[test]
fn exact_generator_laws_coincide_for_small_trees() {
    for (k, d) in [(1, 3), (2, 1), (2, 2), (2, 3), (3, 1), (4, 1), (8, 1)] {
        let shape = TreeShape::new(k, d).unwrap();
        for theta in [int(0), rat(1, 4), rat(1, 2), rat(3, 4), int(1)] {
            let direct = enumerate_joint(&shape, &Channel::binary(theta.clone()).unwrap()).unwrap();
            let pp = exact_law_path_product(&shape, &theta, EnumerationConfig::default()).unwrap();
            let rr = exact_law_restrictions(&shape, &theta, EnumerationConfig::default()).unwrap();
            for a in 0..2 {
                assert!(total_variation(&direct.cond[a], &pp.cond[a]).unwrap().is_zero(), "path k={k} d={d} {theta}");
                assert!(total_variation(&direct.cond[a], &rr.cond[a]).unwrap().is_zero(), "restr k={k} d={d} {theta}");
            }
        }
    }
}

#[test]
fn independent_channel_gives_fair_leaves() {
    let shape = TreeShape::new(2, 10).unwrap();
    let ch = Channel::binary(int(0)).unwrap();
    let mut ones = 0usize;
    for t in 0..100 {
        let tree: LabelArray = generate_direct(&shape, &ch, &SeedSpec::new(11, "gen").trial(t), None).unwrap();
        ones += tree.leaves().iter().filter(|&&x| x == 1).count();
    }
    let f = ones as f64 / (100 * 1024) as f64;
    assert!((f - 0.5).abs() < 0.01, "{f}");
}

#[test]
fn edge_copy_rate() {
    // 10^5 edges of a k=10, d=5 tree family (111110 edges per tree).
    let shape = TreeShape::new(10, 5).unwrap();
    let ch = Channel::binary(from_f64(0.9).unwrap()).unwrap();
    let tree: LabelArray = generate_direct(&shape, &ch, &SeedSpec::new(12, "gen"), None).unwrap();
    let mut same = 0usize;
    let mut edges = 0usize;
    for level in 1..=5 {
        let parent = tree.level(level - 1);
        for (i, &c) in tree.level(level).iter().enumerate() {
            same += (c == parent[i / 10]) as usize;
            edges += 1;
        }
    }
    assert!(edges >= 100_000);
    let f = same as f64 / edges as f64;
    assert!((f - 0.95).abs() < 0.005, "{f}");
}

#[test]
fn generators_agree_on_three_leaf_joint_law() {
    // k=3, d=5, theta=0.8; leaves 0, 1 and 200; 10^5 trees per generator.
    let shape = TreeShape::new(3, 5).unwrap();
    let theta = from_f64(0.8).unwrap();
    let ch = Channel::binary(theta.clone()).unwrap();
    let picks = [0usize, 1, 200];
    let trials = 100_000u64;
    let tally = |which: usize| {
        let mut counts = [0u64; 8];
        for t in 0..trials {
            let s = SeedSpec::new(77 + which as u64, "gen").trial(t);
            let tree: LabelArray = match which {
                0 => generate_direct(&shape, &ch, &s, None).unwrap(),
                1 => generate_path_product(&shape, &theta, &s, None).unwrap(),
                _ => generate_via_restrictions(&shape, &theta, &s, None).unwrap(),
            };
            let l = tree.leaves();
            let idx = picks.iter().enumerate().fold(0, |acc, (b, &i)| acc | (l[i] as usize) << b);
            counts[idx] += 1;
        }
        counts
    };
    let laws = [tally(0), tally(1), tally(2)];
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let t = two_sample_chi_square(&laws[i], &laws[j], 0.001).unwrap();
        assert!(!t.rejects(), "generators {i} vs {j}: chi2 = {}", t.statistic);
    }
}

#[test]
fn node_marginals_uniform() {
    let shape = TreeShape::new(3, 4).unwrap();
    let theta = rat(7, 10);
    let trials = 20_000;
    let mut ones = vec![0u64; shape.total_nodes()];
    for t in 0..trials {
        let tree = generate_path_product(&shape, &theta, &SeedSpec::new(5, "gen").trial(t), None).unwrap();
        let mut pos = 0;
        for l in 0..=4 {
            for &v in tree.level(l) {
                ones[pos] += v as u64;
                pos += 1;
            }
        }
    }
    for (i, &c) in ones.iter().enumerate().step_by(7) {
        let f = c as f64 / trials as f64;
        assert!((f - 0.5).abs() < 0.015, "node {i}: {f}");
    }
}

#[test]
fn pairwise_correlation_law_by_path_product() {
    // distance 2r pairs in a k=2, d=6 tree; 20000 trees, several pairs each.
    let shape = TreeShape::new(2, 6).unwrap();
    let theta = 0.7f64;
    let th = from_f64(theta).unwrap();
    let trials = 20_000;
    let mut same = [0u64; 7];
    let mut total = [0u64; 7];
    for t in 0..trials {
        let tree = generate_path_product(&shape, &th, &SeedSpec::new(21, "gen").trial(t), None).unwrap();
        let l = tree.leaves();
        for r in 1..=6u32 {
            // leaves 0 and 2^(r-1) meet r levels up
            let b = 1usize << (r - 1);
            same[r as usize] += (l[0] == l[b]) as u64;
            total[r as usize] += 1;
        }
    }
    for r in 1..=6 {
        let p = same[r] as f64 / total[r] as f64;
        let expect = 0.5 + theta.powi(2 * r as i32) / 2.0;
        assert!((p - expect).abs() < 0.01, "r={r}: {p} vs {expect}");
    }
}

#[test]
fn restriction_survival_single_input() {
    let shape = TreeShape::new(2, 6).unwrap();
    let theta = rat(1, 2);
    let trials = 100_000u64;
    for h in [1u32, 3] {
        let survived: usize = (0..trials)
            .map(|t| live_inputs_after(&shape, &[17], h, &theta, &SeedSpec::new(8, "restrict").trial(t)).unwrap())
            .sum();
        let p = survived as f64 / trials as f64;
        assert!((p - 0.5f64.powi(h as i32)).abs() < 0.01, "h={h}: {p}");
    }
}

#[test]
fn restriction_survivor_bound_grid() {
    // P[at least c distinct survivors] <= (m theta^h)^c, plus 3 stderr.
    let shape = TreeShape::new(2, 10).unwrap();
    let theta = rat(1, 2);
    let trials = 20_000u64;
    for m in [4usize, 16] {
        // spread the tracked inputs so they do not share low ancestors
        let tracked: Vec<usize> = (0..m).map(|i| i * (shape.n() / m)).collect();
        for h in [4u32, 8] {
            let counts: Vec<usize> = (0..trials)
                .map(|t| {
                    let s = SeedSpec::new(1000 + m as u64 * 10 + h as u64, "restrict").trial(t);
                    live_inputs_after(&shape, &tracked, h, &theta, &s).unwrap()
                })
                .collect();
            for c in [2usize, 3] {
                let hits = counts.iter().filter(|&&n| n >= c).count() as f64;
                let p = hits / trials as f64;
                let se = (p * (1.0 - p) / trials as f64).sqrt();
                let bound = (m as f64 * 0.5f64.powi(h as i32)).powi(c as i32);
                assert!(p <= bound + 3.0 * se, "m={m} h={h} c={c}: {p} > {bound}");
            }
        }
    }
}

#[test]
fn dyadic_sampler_exhaustive() {
    for (num, exp) in [(0u64, 0u32), (1, 1), (3, 2), (6, 3), (5, 3)] {
        let d = Dyadic::new(num, exp).unwrap();
        let ones = (0..1u64 << (exp + 1)).filter(|&b| biased_bit_from_bits(d, b)).count() as i64;
        let p = (int(1) + d.to_rational()) / int(2);
        assert_eq!(rat(ones, 1 << (exp + 1)), p);
    }
}

#[test]
fn approximate_sampler_error_bound() {
    for theta in [rat(1, 3), rat(-2, 7), rat(5, 8), int(0), int(1), rat(99, 100)] {
        for t in 1..=12u32 {
            let th = approx_threshold(&theta, t).unwrap();
            let ones = (0..1u64 << t).filter(|&b| biased_bit_approx_from_bits(th, t, b)).count() as i64;
            let p = (int(1) + &theta) / int(2);
            let err = num::abs(rat(ones, 1 << t) - p);
            assert!(err <= rat(1, 1 << t), "theta={theta} t={t}");
        }
    }
}

#[test]
fn leaf_noise_rates() {
    let shape = TreeShape::new(10, 5).unwrap();
    let ch = Channel::binary(from_f64(0.6).unwrap()).unwrap();
    let tree: LabelArray = generate_direct(&shape, &ch, &SeedSpec::new(3, "gen"), None).unwrap();
    let same = add_leaf_noise(&tree, &NoiseSpec::new(int(0)).unwrap(), &SeedSpec::new(3, "noise")).unwrap();
    assert_eq!(same, tree.leaves());
    let noisy =
        add_leaf_noise(&tree, &NoiseSpec::new(from_f64(0.1).unwrap()).unwrap(), &SeedSpec::new(3, "noise")).unwrap();
    let flips = noisy.iter().zip(tree.leaves()).filter(|(a, b)| a != b).count() as f64 / 1e5;
    assert!((flips - 0.1).abs() < 0.005, "{flips}");
    let erased = add_leaf_noise(&tree, &NoiseSpec::new(rat(1, 2)).unwrap(), &SeedSpec::new(4, "noise")).unwrap();
    let agree = erased.iter().zip(tree.leaves()).filter(|(a, b)| a == b).count() as f64 / 1e5;
    assert!((agree - 0.5).abs() < 0.01, "{agree}");
}

#[test]
fn leaf_count_sampler_matches_tree_counts() {
    // k=3, d=4, theta=0.6, root 1: compare the count histogram of the
    // level-wise binomial sampler with counts from materialised trees.
    let shape = TreeShape::new(3, 4).unwrap();
    let theta = 0.6;
    let ch = Channel::binary(from_f64(theta).unwrap()).unwrap();
    let trials = 40_000u64;
    let mut a = vec![0u64; shape.n() + 1];
    let mut b = vec![0u64; shape.n() + 1];
    for t in 0..trials {
        let tree: LabelArray = generate_direct(&shape, &ch, &SeedSpec::new(6, "gen").trial(t), Some(1)).unwrap();
        a[tree.leaves().iter().filter(|&&x| x == 1).count()] += 1;
        let mut rng = StreamRng::new(&SeedSpec::new(6, "count").trial(t));
        b[sample_leaf_count(&shape, theta, 1, &mut rng).unwrap() as usize] += 1;
    }
    // pool sparse tails into neighbours so expected cells are not tiny
    let pool = |v: &[u64]| -> Vec<u64> { v.chunks(4).map(|c| c.iter().sum()).collect() };
    let t = two_sample_chi_square(&pool(&a), &pool(&b), 0.001).unwrap();
    assert!(!t.rejects(), "chi2 = {} df = {}", t.statistic, t.df);
    let mean = |v: &[u64]| v.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum::<f64>() / trials as f64;
    let expect = 81.0 / 2.0 + 81.0 * theta.powi(4) / 2.0;
    assert!((mean(&b) - expect).abs() < 0.3, "{}", mean(&b));
}

#[test]
fn mean_law_monte_carlo_small() {
    let shape = TreeShape::new(3, 3).unwrap();
    let theta = rat(1, 2);
    let trials = 20_000u64;
    let mut sum = 0u64;
    let mut sq = 0u64;
    for t in 0..trials {
        let tree = generate_via_restrictions(&shape, &theta, &SeedSpec::new(9, "gen").trial(t), Some(1)).unwrap();
        let c = tree.leaves().iter().filter(|&&x| x == 1).count() as u64;
        sum += c;
        sq += c * c;
    }
    let mean = sum as f64 / trials as f64;
    let var = sq as f64 / trials as f64 - mean * mean;
    let se = (var / trials as f64).sqrt();
    let expect = 27.0 / 2.0 + 27.0 * 0.125 / 2.0;
    assert!((mean - expect).abs() < 3.0 * se + 1e-9, "{mean} vs {expect}");
}
