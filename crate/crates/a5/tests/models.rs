use bcast_a5::group::{product, Elem, ORDER};
use bcast_a5::pair::{generate_pair_model, project_to_classes, PairLabel, PAIR_LABELS};
use bcast_a5::product_tree::{product_tree_generate, root_of_word};
use bcast_a5::quotient::{generate_class_model, quotient_channel};
use bcast_a5::reconstruct::{default_tau, model_accuracy};
use bcast_a5::{ClassPair, Model};
use bcast_core::rational::to_f64;
use bcast_core::stats::{goodness_of_fit, two_sample_chi_square};
use bcast_core::{SeedSpec, TreeShape};

fn fixed_word() -> Vec<Elem> {
    [3, 41, 17, 58].iter().map(|&i| Elem::from_index(i)).collect()
}

/// Exact child law of a pair label: 1/90 on factorizations of `first`,
/// 1/180 on those of `second` (1/60 when they coincide).
fn exact_child_law(parent: PairLabel) -> Vec<f64> {
    let mut p = vec![0.0; PAIR_LABELS];
    for b in Elem::all() {
        p[PairLabel::new(b, b.inv().mul(parent.first)).code() as usize] += 2.0 / 180.0;
        p[PairLabel::new(b, b.inv().mul(parent.second)).code() as usize] += 1.0 / 180.0;
    }
    p
}

#[test]
fn pair_model_branch_frequency_and_uniform_first_entries() {
    let shape = TreeShape::new(10, 4).unwrap();
    let (mut edges, mut first_branch) = (0u64, 0u64);
    let mut firsts = vec![0u64; ORDER];
    let mut t = 0;
    while edges < 100_000 {
        let tree = generate_pair_model(&shape, &SeedSpec::new(5, "pair").trial(t), None).unwrap();
        t += 1;
        for level in 1..=4 {
            for (i, &c) in tree.level(level).iter().enumerate() {
                let p = PairLabel::from_code(tree.level(level - 1)[i / 10]);
                let child = PairLabel::from_code(c);
                firsts[child.first.index()] += 1;
                if p.first != p.second {
                    edges += 1;
                    first_branch += (child.product() == p.first) as u64;
                }
            }
        }
    }
    let rate = first_branch as f64 / edges as f64;
    assert!((rate - 2.0 / 3.0).abs() <= 0.01, "{rate}");
    assert!(!goodness_of_fit(&firsts, &[1.0 / 60.0; 60], 0.001).unwrap().rejects());
}

#[test]
fn product_tree_child_law_matches_pair_model() {
    let sigma = fixed_word();
    let root = root_of_word(&sigma);
    let shape = TreeShape::new(3, 1).unwrap();
    let samples = 300_000;
    let (mut pt, mut direct) = (vec![0u64; PAIR_LABELS], vec![0u64; PAIR_LABELS]);
    for t in 0..samples / 3 {
        let a = product_tree_generate(1, &sigma, 3, &SeedSpec::new(11, "pt").trial(t)).unwrap();
        let b = generate_pair_model(&shape, &SeedSpec::new(12, "pair").trial(t), Some(root)).unwrap();
        for (&x, &y) in a.leaves().iter().zip(b.leaves()) {
            pt[x as usize] += 1;
            direct[y as usize] += 1;
        }
    }
    assert!(!two_sample_chi_square(&pt, &direct, 0.001).unwrap().rejects());
    let law = exact_child_law(root);
    assert!(!goodness_of_fit(&pt, &law, 0.001).unwrap().rejects());
    assert!(!goodness_of_fit(&direct, &law, 0.001).unwrap().rejects());
}

#[test]
fn product_tree_edges_stay_in_parent_pairs() {
    let sigma: Vec<Elem> = (0..16).map(|i| Elem::from_index((i * 7 + 2) % 60)).collect();
    for t in 0..20 {
        let tree = product_tree_generate(3, &sigma, 4, &SeedSpec::new(t, "pt")).unwrap();
        assert_eq!(PairLabel::from_code(tree.root()).product(), product(&sigma));
        for level in 1..=3 {
            for (i, &c) in tree.level(level).iter().enumerate() {
                let p = PairLabel::from_code(tree.level(level - 1)[i / 4]);
                let q = PairLabel::from_code(c).product();
                assert!(q == p.first || q == p.second);
            }
        }
    }
}

#[test]
fn projected_pair_model_follows_class_channel() {
    let ch = quotient_channel().unwrap();
    let root = PairLabel::new(Elem::from_index(9), Elem::from_index(50));
    let part = root.classes().code() as usize;
    let shape = TreeShape::new(50, 1).unwrap();
    let mut counts = vec![0u64; 16];
    let mut direct = vec![0u64; 16];
    for t in 0..2000 {
        let tree = generate_pair_model(&shape, &SeedSpec::new(3, "pair").trial(t), Some(root)).unwrap();
        for &c in project_to_classes(&tree).unwrap().leaves() {
            counts[c as usize] += 1;
        }
        let cls = generate_class_model(&shape, &SeedSpec::new(4, "cls").trial(t), Some(root.classes())).unwrap();
        for &c in cls.leaves() {
            direct[c as usize] += 1;
        }
    }
    let law: Vec<f64> = (0..16).map(|c| to_f64(ch.prob(c, part))).collect();
    assert!(!goodness_of_fit(&counts, &law, 0.001).unwrap().rejects());
    assert!(!goodness_of_fit(&direct, &law, 0.001).unwrap().rejects());
}

#[test]
fn class_model_reconstruction_small_scale() {
    let acc = model_accuracy(Model::Class16, 1500, 2, 30, &default_tau(), &SeedSpec::new(21, "rec")).unwrap();
    assert!(acc.correct as f64 / 30.0 >= 0.8, "{acc:?}");
    let diag = ClassPair::from_code(0);
    assert_eq!(diag.first, diag.second);
}

#[test]
fn pair_model_reconstruction_small_scale() {
    let acc = model_accuracy(Model::Pair3600, 600, 1, 100, &default_tau(), &SeedSpec::new(2, "rec")).unwrap();
    assert!(acc.correct >= 95, "{acc:?}");
}
