use bcast_core::bp::{binary_log_odds, bp_posterior, LeafLikelihood, Mode};
use bcast_core::gen::{generate_direct, generate_path_product};
use bcast_core::rational::{fixed_point, rat};
use bcast_core::{Channel, LabelArray, NodeAddr, SeedSpec, TreeShape};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parent_of_child_is_self(k in 1usize..8, level in 0u32..6, idx in 0u64..1000) {
        let v = NodeAddr::new(level, idx);
        for c in v.children(k) {
            prop_assert_eq!(c.parent(k), Some(v));
        }
    }

    #[test]
    fn level_sizes(k in 1usize..6, d in 0u32..6) {
        let s = TreeShape::new(k, d).unwrap();
        let total: usize = (0..=d).map(|l| s.level_len(l)).sum();
        prop_assert_eq!(total, s.total_nodes());
        prop_assert_eq!(s.level_len(d), s.n());
    }

    #[test]
    fn label_dumps_round_trip(k in 1usize..4, d in 0u32..4, num in 0i64..=10, seed in any::<u64>()) {
        let shape = TreeShape::new(k, d).unwrap();
        let ch = Channel::binary(rat(num, 10)).unwrap();
        let t: LabelArray = generate_direct(&shape, &ch, &SeedSpec::new(seed, "gen"), None).unwrap();
        prop_assert_eq!(LabelArray::<u8>::from_bytes(&t.to_bytes()).unwrap(), t.clone());
        prop_assert_eq!(LabelArray::<u8>::from_json(&t.to_json()).unwrap(), t);
    }

    #[test]
    fn generation_is_pure(seed in any::<u64>(), num in -10i64..=10) {
        let shape = TreeShape::new(3, 3).unwrap();
        let a = generate_path_product(&shape, &rat(num, 10), &SeedSpec::new(seed, "gen"), None).unwrap();
        let b = generate_path_product(&shape, &rat(num, 10), &SeedSpec::new(seed, "gen"), None).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn float_complement_symmetry(leaves in proptest::collection::vec(0u8..2, 27), theta in 0.0f64..0.99, s in 0.0f64..0.5) {
        let shape = TreeShape::new(3, 3).unwrap();
        let comp: Vec<u8> = leaves.iter().map(|x| 1 - x).collect();
        let h = binary_log_odds(&shape, theta, &leaves, s);
        let hc = binary_log_odds(&shape, theta, &comp, s);
        prop_assert!((h + hc).abs() <= 1e-9 * h.abs().max(1.0));
    }

    #[test]
    fn posterior_masses_sum_to_one(leaves in proptest::collection::vec(0u8..2, 9), num in 0i64..10) {
        let shape = TreeShape::new(3, 2).unwrap();
        let ch = Channel::binary(rat(num, 10)).unwrap();
        let ev = LeafLikelihood::observed(&leaves, 2).unwrap();
        let r = bp_posterior(&shape, &ch, &ev, Mode::Rational).unwrap();
        let sum: bcast_core::Rational = r.exact.unwrap().iter().sum();
        prop_assert_eq!(sum, rat(1, 1));
        let f = bp_posterior(&shape, &ch, &ev, Mode::Float).unwrap();
        prop_assert!((f.masses.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_point_is_monotone(a in 0i64..1000, b in 0i64..1000) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(fixed_point(&rat(lo, 1000)) <= fixed_point(&rat(hi, 1000)));
    }
}
