use gsens_core::eval::{Machine, Payload, Value};
use gsens_core::session::Session;
use gsens_core::{interior, Const, SType, Sens};
use gsens_harness::corpus::{bounded_specs, mp_corpus, worked_corpus, MAX_NODES};
use gsens_harness::{distance, mp_check, parse_distance, parse_sens_env, ts_mp_check, HarnessError, MPSpec, ViolationKind};

const X_PLUS_2Y: &str = "def f[r](x: Number[r], y: Number[2r]): Number[5r] = x + y + y;";

fn constant(c: Const) -> Value {
    Value::constant(c)
}

#[test]
fn distances_on_base_types() {
    let real = SType::real(Default::default());
    let boolean = SType::bool(Default::default());
    let d = |g: &SType, a, b| distance(g, &constant(a), &constant(b)).unwrap();
    assert_eq!(d(&real, Const::Real(3.0), Const::Real(5.0)), Sens::new(2.0).unwrap());
    assert_eq!(d(&boolean, Const::Bool(true), Const::Bool(false)), Sens::INF);
    assert_eq!(d(&boolean, Const::Bool(true), Const::Bool(true)), Sens::ZERO);
    assert_eq!(d(&SType::unit(), Const::Unit, Const::Unit), Sens::ZERO);
}

#[test]
fn x_plus_2y_on_the_worked_pair() {
    let spec = MPSpec::from_source("x_plus_2y", X_PLUS_2Y).unwrap();
    let spec = spec.with_delta(parse_distance("2r").unwrap()).unwrap();
    assert_eq!(spec.bound(), Sens::new(10.0).unwrap());
    let params: Vec<SType> = spec.target.params().cloned().collect();
    let arg = |g: &SType, x: f64| {
        let lower = g.with_eff(g.eff().lower().embed());
        Value::new(interior(&lower, g).unwrap(), Payload::Const(Const::Real(x)), g.clone())
    };
    let run = |x: f64, y: f64| {
        let v = spec.target.apply(&mut Machine::new(0), &[arg(&params[0], x), arg(&params[1], y)]).unwrap();
        v.as_real().unwrap()
    };
    let (o1, o2) = (run(2.0, 4.0), run(4.0, 8.0));
    assert_eq!((o1, o2), (10.0, 20.0));
    assert!((o1 - o2).abs() <= spec.bound().value());
}

#[test]
fn x_plus_2y_over_a_thousand_pairs() {
    let spec = MPSpec::from_source("x_plus_2y", X_PLUS_2Y).unwrap().with_delta(parse_distance("2r").unwrap()).unwrap();
    let report = mp_check(&spec, 1000, 7);
    assert!(report.passed(), "{}", report);
    assert_eq!(report.successes, 1000);
    assert!(report.max_ratio <= 1.0);
}

#[test]
fn unknown_claim_is_never_violated() {
    let spec = MPSpec::from_source("double", "def f[r](x: Number[r]): Number[?r] = x + x;").unwrap();
    assert!(spec.bound().is_inf());
    assert!(mp_check(&spec, 200, 1).passed());
}

#[test]
fn a_wrong_claim_is_caught() {
    // No ascription to 1r inside, so nothing fails at runtime.
    let spec = MPSpec::from_source("double", "def f[r](x: Number[r]): Number[?r] = x + x;")
        .unwrap()
        .with_sigma(parse_sens_env("1r").unwrap());
    let report = mp_check(&spec, 200, 3);
    assert!(report.violations.iter().any(|v| v.kind == ViolationKind::Distance), "{}", report);
    assert!(report.violations.iter().any(|v| v.kind == ViolationKind::Adequacy));
}

#[test]
fn distance_must_mention_bound_resources() {
    let spec = MPSpec::from_source("x_plus_2y", X_PLUS_2Y).unwrap();
    assert!(matches!(spec.with_delta(parse_distance("1q").unwrap()), Err(HarnessError::Spec(_))));
    assert!(parse_distance("?r").is_err());
}

#[test]
fn shipped_corpus_is_small_and_covers_the_language() {
    let corpus = mp_corpus().unwrap();
    assert!(corpus.len() >= 50, "{} programs", corpus.len());
    for p in &corpus {
        let n = p.size().unwrap();
        assert!(n <= MAX_NODES, "{} has {} nodes", p.name, n);
        p.spec().unwrap_or_else(|e| panic!("{}: {}", p.name, e));
    }
    let all: String = corpus.iter().map(|p| p.source.as_str()).collect();
    for feature in ["fn (", "/\\", "fst(", "snd(", "inl<", "case ", "fold<", "unfold(", "fix (", ":: Number[?", "List("] {
        assert!(all.contains(feature), "no program uses `{}`", feature);
    }
    assert!(bounded_specs(&corpus).unwrap().len() >= 20);
}

#[test]
fn shipped_corpus_preserves_metrics() {
    for p in mp_corpus().unwrap() {
        let report = mp_check(&p.spec().unwrap(), 200, 11);
        assert!(report.passed(), "{}", report);
        assert_eq!(report.trials, report.successes + report.error_pairs);
    }
}

#[test]
fn bounded_corpus_preserves_termination() {
    let specs = bounded_specs(&mp_corpus().unwrap()).unwrap();
    for spec in &specs {
        let report = ts_mp_check(spec, 200, 13).unwrap();
        assert!(report.passed(), "{}", report);
        assert!(report.successes == report.trials || report.error_pairs == report.trials, "{}", report);
    }
}

#[test]
fn unbounded_counterexample_is_rejected_up_front() {
    let cex = worked_corpus().unwrap().into_iter().find(|p| p.name == "counterexample").unwrap();
    let spec = cex.spec().unwrap();
    assert!(matches!(ts_mp_check(&spec, 10, 0), Err(HarnessError::Unbounded(_))));
    // Termination-insensitively it is still fine: errors are not violations.
    assert!(mp_check(&spec, 200, 0).passed());
}

#[test]
fn glm_inner_ascription_has_one_outcome_class() {
    for (name, expect_ok) in [("glm_identity", true), ("glm_double", false)] {
        let p = mp_corpus().unwrap().into_iter().find(|p| p.name.ends_with(name)).unwrap();
        let report = ts_mp_check(&p.spec().unwrap(), 200, 5).unwrap();
        assert!(report.passed(), "{}", report);
        let uniform = if expect_ok { report.successes } else { report.error_pairs };
        assert_eq!(uniform, 200, "{}", report);
    }
}

#[test]
fn constant_program_is_trivially_uniform() {
    let spec = MPSpec::from_source("constant", "def f[r](x: Number[r]): Number[0r] = 42;").unwrap();
    let report = ts_mp_check(&spec, 50, 0).unwrap();
    assert_eq!(report.successes, 50);
}

#[test]
fn reports_are_deterministic() {
    let spec = MPSpec::from_source("x_plus_2y", X_PLUS_2Y).unwrap();
    let a = mp_check(&spec, 100, 9);
    let b = mp_check(&spec, 100, 9);
    assert_eq!(a.max_ratio, b.max_ratio);
    let _ = Session::new();
}
