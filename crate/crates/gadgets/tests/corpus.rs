use bcast_core::formula::{random_formula, Formula, FormulaLimits};
use bcast_core::rational::rat;
use bcast_core::rng::StreamRng;
use bcast_core::SeedSpec;
use bcast_gadgets::template::ARITY;
use bcast_gadgets::verify::template_posterior;
use bcast_gadgets::{compile_formula, lemma_grid_check, verify_corpus, verify_gadget};

fn corpus(n: usize, seed: u64) -> Vec<Formula> {
    let mut rng = StreamRng::new(&SeedSpec::new(seed, "gadget-corpus"));
    let lim = FormulaLimits { vars: 8, max_gates: 24, max_depth: 5, use_or: true, use_consts: true };
    (0..n).map(|_| random_formula(&mut rng, &lim)).collect()
}

#[test]
fn random_corpus_tracks_everywhere() {
    let fs = corpus(20, 1);
    let r = verify_corpus(&fs, 8, 6).unwrap();
    assert_eq!(r.checks, 20 * 256);
    assert!(r.violations.is_empty(), "{:?}", r.violations.first());
    assert!(r.min_true >= 0.95 && r.max_false <= 0.05);
}

#[test]
fn templates_have_full_length() {
    for f in corpus(100, 2) {
        let t = compile_formula(&f).unwrap();
        assert_eq!(t.entries.len(), ARITY.pow(f.depth()));
        assert!(t.num_vars() <= 8);
    }
}

#[test]
fn constant_true_formula_at_depth_three() {
    let f = Formula::parse("(or (and (not 0) 1) (and 1 1))").unwrap();
    assert_eq!(f.depth(), 3);
    let v = verify_gadget(&f, &[], 6).unwrap();
    assert!(v.exact.unwrap() > rat(19, 20));
}

#[test]
fn complement_duality_exact() {
    for f in corpus(10, 3).into_iter().filter(|f| f.depth() <= 3) {
        let t = compile_formula(&f).unwrap();
        let c = t.complement();
        let a = vec![true, false, true, true, false, false, true, false];
        let p = template_posterior(&t, &a).unwrap().1.unwrap();
        let q = template_posterior(&c, &a).unwrap().1.unwrap();
        assert_eq!(p + q, rat(1, 1));
    }
}

#[test]
fn lemma_grid_at_one_percent() {
    let r = lemma_grid_check(0.01, false).unwrap();
    assert!(r.pass);
    assert_eq!(r.points, 6u64.pow(4) * 101 * 101);
    assert_eq!(r.worst, [0.95, 0.95, 0.95, 0.95, 0.0, 0.0]);
    assert!(r.worst_posterior >= rat(19, 20));
    let c = lemma_grid_check(0.01, true).unwrap();
    assert!(c.pass);
    assert!(c.worst_posterior <= rat(1, 20));
}
