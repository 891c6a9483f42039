use bcast_core::rational::rat;
use bcast_core::Rational;
use bcast_gadgets::gadget_posterior_bound;
use proptest::prelude::*;

fn ps(v: &[i64]) -> [Rational; 6] {
    std::array::from_fn(|i| rat(v[i], 100))
}

proptest! {
    #[test]
    fn monotone_in_each_coordinate(v in proptest::collection::vec(0i64..100, 6), i in 0usize..6) {
        let base = gadget_posterior_bound(&ps(&v)).unwrap();
        let mut up = v.clone();
        up[i] += 1;
        prop_assert!(gadget_posterior_bound(&ps(&up)).unwrap() > base);
    }

    #[test]
    fn complement_symmetry(v in proptest::collection::vec(0i64..=100, 6)) {
        let c: Vec<i64> = v.iter().map(|x| 100 - x).collect();
        let a = gadget_posterior_bound(&ps(&v)).unwrap();
        let b = gadget_posterior_bound(&ps(&c)).unwrap();
        prop_assert_eq!(a + b, rat(1, 1));
    }

    #[test]
    fn invariant_under_permutation(v in proptest::collection::vec(0i64..=100, 6), r in 0usize..6) {
        let mut w = v.clone();
        w.rotate_left(r);
        prop_assert_eq!(gadget_posterior_bound(&ps(&v)).unwrap(), gadget_posterior_bound(&ps(&w)).unwrap());
    }
}
