use gsens_core::ctrans;
use gsens_harness::evidence::{interval_chain, random_evidence, random_shape, refine};
use gsens_harness::{ctrans_assoc_fuzz, ctrans_monotonicity_fuzz};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn interval_chain_is_undefined_both_ways() {
    let [e1, e2, e3] = interval_chain();
    assert!(ctrans(&e1, &e2).is_some());
    assert!(ctrans(&e2, &e3).is_none());
    assert!(ctrans(&ctrans(&e1, &e2).unwrap(), &e3).is_none());
    assert!(ctrans(&e2, &e3).and_then(|e| ctrans(&e1, &e)).is_none());
}

#[test]
fn refinement_is_more_precise() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let shape = random_shape(&mut rng, 2);
        let e = random_evidence(&mut rng, &shape);
        assert!(refine(&e, &mut rng).precise_in(&e));
    }
}

#[test]
fn identity_triples_associate() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let shape = random_shape(&mut rng, 2);
        let g = random_evidence(&mut rng, &shape).lhs;
        let i = gsens_core::interior(&g, &g).unwrap();
        let once = ctrans(&i, &i);
        assert_eq!(once.as_ref().and_then(|e| ctrans(e, &i)), ctrans(&i, &once.clone().unwrap()));
    }
}

#[test]
fn consistent_transitivity_is_associative() {
    let report = ctrans_assoc_fuzz(100_000, 5);
    assert!(report.passed(), "{}", report);
    assert!(report.defined > 10_000, "{}", report);
    assert!(report.defined < report.trials, "{}", report);
}

#[test]
fn consistent_transitivity_is_monotone() {
    let report = ctrans_monotonicity_fuzz(100_000, 6);
    assert!(report.passed(), "{}", report);
    assert!(report.defined > 10_000, "{}", report);
}
