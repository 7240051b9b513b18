use gsens_core::eval::RuntimeError;
use gsens_dp::{dp_ratio_test, laplace_sample, Gat, Glm, LaplaceParams, RatioConfig, Verdict};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const IDENTITY: &str = "fn (y: Number[db]) => y";
const DOUBLE: &str = "fn (y: Number[db]) => y + y";
const TRIPLE: &str = "fn (y: Number[db]) => y + y + y";
const ZERO: &str = "fn (y: Number[db]) => 0";

#[test]
fn laplace_median_and_parameters() {
    assert_eq!(LaplaceParams::new(1.0).unwrap().quantile(0.0), 0.0);
    assert!(LaplaceParams::new(0.0).is_err());
    assert!(LaplaceParams::new(-1.0).is_err());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(laplace_sample(-2.0, &mut rng).is_err());
}

#[test]
fn laplace_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 1_000_000;
    let xs: Vec<f64> = (0..n).map(|_| laplace_sample(1.0, &mut rng).unwrap()).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    assert!(mean.abs() < 0.01, "mean {}", mean);
    let below = xs.iter().filter(|x| **x <= 0.0).count() as f64 / n as f64;
    assert!((below - 0.5).abs() < 0.005, "Pr[X <= 0] = {}", below);
    // Spot-check the CDF at ±1: 1 - e^{-1}/2.
    let p = LaplaceParams::new(1.0).unwrap();
    let at_one = xs.iter().filter(|x| **x <= 1.0).count() as f64 / n as f64;
    assert!((at_one - p.cdf(1.0)).abs() < 0.005);
}

#[test]
fn glm_accepts_one_sensitive_queries_only() {
    let id = Glm::new(IDENTITY, 1.0).unwrap();
    let double = Glm::new(DOUBLE, 1.0).unwrap();
    let zero = Glm::new(ZERO, 1.0).unwrap();
    for (i, x) in [-50.0, -1.0, 0.0, 0.5, 3.0, 1e6].into_iter().enumerate() {
        assert!(id.run(x, i as u64).is_ok());
        assert!(zero.run(x, i as u64).is_ok());
        assert!(matches!(double.run(x, i as u64), Err(RuntimeError::SensitivityViolation { .. })));
    }
}

#[test]
fn glm_outcome_class_does_not_depend_on_the_seed() {
    let id = Glm::new(IDENTITY, 1.0).unwrap();
    let double = Glm::new(DOUBLE, 1.0).unwrap();
    for seed in 0..100 {
        assert!(id.run(7.0, seed).is_ok());
        assert!(double.run(7.0, seed).is_err());
    }
    let a = id.run(7.0, 3).unwrap();
    assert_eq!(a, id.run(7.0, 3).unwrap());
    assert_ne!(a, id.run(7.0, 4).unwrap());
}

#[test]
fn glm_rejects_bad_epsilon() {
    assert!(Glm::new(IDENTITY, 0.0).is_err());
    assert!(Glm::new(IDENTITY, f64::NAN).is_err());
}

#[test]
fn gat_never_selects_an_oversensitive_query() {
    let qs = ["fn (y: Number[db]) => y - 1000", TRIPLE, "fn (y: Number[db]) => y + 1000"];
    let gat = Gat::new(&qs, 0.0, 1.0).unwrap();
    let mut seen = [0usize; 3];
    for seed in 0..1000 {
        let i = gat.run(5.0, seed).unwrap();
        assert!((0..3).contains(&i), "index {}", i);
        seen[i as usize] += 1;
    }
    assert_eq!(seen[1], 0);
    assert!(seen[2] > 900, "{:?}", seen);
}

#[test]
fn gat_with_only_oversensitive_queries_returns_minus_one() {
    let gat = Gat::new(&[DOUBLE, TRIPLE], 0.0, 1.0).unwrap();
    for seed in 0..1000 {
        assert_eq!(gat.run(100.0, seed).unwrap(), -1);
    }
    assert_eq!(Gat::new(&[], 0.0, 1.0).unwrap().run(1.0, 0).unwrap(), -1);
}

#[test]
fn gat_finds_a_query_far_above_threshold() {
    // Noise scales are 0.2 and 0.4 at eps = 10; a gap of 100 is never bridged
    // in practice (tail probability below e^-200).
    let gat = Gat::new(&[IDENTITY], 0.0, 10.0).unwrap();
    let hits = (0..1000).filter(|s| gat.run(100.0, *s).unwrap() == 0).count();
    assert!(hits >= 990, "{} hits", hits);
}

#[test]
fn gat_skips_exactly_the_queries_glm_rejects() {
    let qs = [IDENTITY, DOUBLE, ZERO, TRIPLE];
    let db = 4.0;
    let rejected: Vec<bool> = qs.iter().map(|q| Glm::new(q, 0.25).unwrap().run(db, 0).is_err()).collect();
    assert_eq!(rejected, [false, true, false, true]);
    for seed in 1..50 {
        let now: Vec<bool> = qs.iter().map(|q| Glm::new(q, 0.25).unwrap().run(db, seed).is_err()).collect();
        assert_eq!(now, rejected);
    }
    let gat = Gat::new(&qs, 2.0, 1.0).unwrap();
    for seed in 0..300 {
        let i = gat.run(db, seed).unwrap();
        assert!(i == -1 || !rejected[i as usize], "selected rejected query {}", i);
    }
}

fn small(samples: usize) -> RatioConfig {
    RatioConfig { samples, ..RatioConfig::default() }
}

#[test]
fn glm_is_differentially_private_at_its_epsilon() {
    let id = Glm::new(IDENTITY, 1.0).unwrap();
    let report = dp_ratio_test(|x, s| id.run(x, s), 0.0, 1.0, 1.0, &RatioConfig::default());
    assert_eq!(report.verdict, Verdict::Pass, "{}", report);
    assert!(report.qualifying_bins >= 10);
}

#[test]
fn glm_is_not_private_at_a_smaller_epsilon() {
    let id = Glm::new(IDENTITY, 1.0).unwrap();
    let report = dp_ratio_test(|x, s| id.run(x, s), 0.0, 1.0, 0.2, &small(100_000));
    assert_eq!(report.verdict, Verdict::Fail, "{}", report);
}

#[test]
fn identical_inputs_pass() {
    let id = Glm::new(IDENTITY, 1.0).unwrap();
    let report = dp_ratio_test(|x, s| id.run(x, s), 3.0, 3.0, 0.01, &small(50_000));
    assert_eq!(report.verdict, Verdict::Pass, "{}", report);
}

#[test]
fn too_few_samples_are_inconclusive() {
    let id = Glm::new(IDENTITY, 1.0).unwrap();
    let report = dp_ratio_test(|x, s| id.run(x, s), 0.0, 1.0, 1.0, &small(400));
    assert_eq!(report.verdict, Verdict::Inconclusive, "{}", report);
}
