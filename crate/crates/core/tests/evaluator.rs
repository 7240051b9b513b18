use gsens_core::eval::{msens, RuntimeError};
use gsens_core::session::{GsError, ItemResult, Session};
use gsens_core::{Const, ResourceVar, Sens, StaticSensEnv};

fn run(src: &str) -> Result<ItemResult, GsError> {
    Ok(Session::new().run_last(src)?.expect("program has an item"))
}

fn value(src: &str) -> (f64, String, StaticSensEnv) {
    let r = run(src).unwrap_or_else(|e| panic!("{}: {}", src, e));
    let v = r.value().unwrap();
    (v.as_real().expect("a number"), v.ty.to_string(), msens(&v.ev))
}

fn violation(src: &str) -> bool {
    matches!(run(src), Err(GsError::Runtime(RuntimeError::SensitivityViolation { .. })))
}

fn sens(pairs: &[(&str, f64)]) -> StaticSensEnv {
    StaticSensEnv::from_entries(pairs.iter().map(|(r, s)| (ResourceVar::named(r), Sens::new(*s).unwrap())))
}

const SCALE: &str = "let res x = 3;
def scale(n: Number, res v: Number): Number[?v] =
  if (n == 0) then 0 else v + scale(n - 1, v);";

#[test]
fn constant_evaluates_to_itself() {
    let r = run("1").unwrap();
    assert_eq!(r.value().unwrap().as_const(), Some(Const::Real(1.0)));
    assert!(msens(&r.value().unwrap().ev).is_empty());
}

#[test]
fn double_under_resource_is_two_sensitive() {
    let (v, ty, ms) = value("let res r = 1; (fn (x: Number[r]) => x + x)(r)");
    assert_eq!(v, 2.0);
    assert_eq!(ty, "Number[2r]");
    assert_eq!(ms, sens(&[("r", 2.0)]));
    let (v, ty, ms) = value("(/\\r. (fn (x: Number[r]) => x + x)(1 :: Number[r]))[]");
    assert_eq!((v, ty.as_str()), (2.0, "Number"));
    assert!(ms.is_empty());
}

#[test]
fn narrowing_a_two_sensitive_value_fails_at_runtime() {
    assert!(violation("let res r = 1; let e = r + r; (e :: Number[?r]) :: Number[1r]"));
    let (v, _, _) = value("let res r = 1; let e = r; (e :: Number[?r]) :: Number[1r]");
    assert_eq!(v, 1.0);
}

#[test]
fn pending_ascriptions_are_refuted_under_resource_abstraction() {
    assert!(violation("let res r1 = 0; (/\\r2. 5 :: Number[r1] :: Number[?r1] :: Number[r2])[r1]"));
}

#[test]
fn scale_monitors_exact_sensitivity() {
    let (v, ty, ms) = value(&format!("{} scale(2, x)", SCALE));
    assert_eq!(v, 6.0);
    assert_eq!(ty, "Number[?x]");
    assert_eq!(ms, sens(&[("x", 2.0)]));
    let r = run(&format!("{} scale(2, x)", SCALE)).unwrap();
    let rhs = r.value().unwrap().ev.rhs.eff();
    assert_eq!(rhs.to_string(), "[2,inf]x");
}

#[test]
fn gradual_scale_fails_only_past_the_declared_bound() {
    let f = "def f(y: Number[10x]): Number[10x] = y;";
    let (v, _, _) = value(&format!("{} {} f(scale(10, x))", SCALE, f));
    assert_eq!(v, 30.0);
    assert!(violation(&format!("{} {} f(scale(11, x))", SCALE, f)));
}

#[test]
fn division_by_zero_is_not_a_violation() {
    assert!(matches!(run("1 / 0"), Err(GsError::Runtime(RuntimeError::DivisionByZero { .. }))));
    assert!(matches!(
        run("try { 1 / 0 } catch { 2 }"),
        Err(GsError::Runtime(RuntimeError::DivisionByZero { .. }))
    ));
}

#[test]
fn try_catches_violations() {
    let (v, _, _) = value("let res r = 1; try { (r + r) :: Number[?r] :: Number[r] } catch { 0 }");
    assert_eq!(v, 0.0);
}

#[test]
fn step_budget_is_reported_distinctly() {
    let src = "def loop(n: Number): Number = loop(n); loop(1)";
    let r = Session::new().with_budget(10_000).run_last(src);
    assert!(matches!(r, Err(GsError::Runtime(RuntimeError::BudgetExhausted { .. }))));
}

#[test]
fn lists_pairs_and_sums() {
    let (v, _, _) = value("List(1, 2, 3).get(1)");
    assert_eq!(v, 2.0);
    let (v, _, _) = value("List(1, 2, 3).length()");
    assert_eq!(v, 3.0);
    let (v, _, _) = value("List(1, 2, 3).indexOf(fn (y: Number) => y > 1)");
    assert_eq!(v, 1.0);
    let (v, _, _) = value("List(1, 2, 3).indexOf(fn (y: Number) => y > 5)");
    assert_eq!(v, -1.0);
    let (v, _, _) = value("fst((1, 2)) + snd((1, 2))");
    assert_eq!(v, 3.0);
    let (v, _, _) = value("case inl<Boolean>(4) of { inl a => a | inr b => 0 }");
    assert_eq!(v, 4.0);
    assert!(matches!(run("List(1).get(3)"), Err(GsError::Runtime(RuntimeError::UserError { .. }))));
}

#[test]
fn deterministic_under_equal_seeds() {
    let src = "laplace(1, 1, 0.5)";
    let a = Session::new().with_seed(7).run_last(src).unwrap().unwrap();
    let b = Session::new().with_seed(7).run_last(src).unwrap().unwrap();
    assert_eq!(a.value().unwrap().as_real(), b.value().unwrap().as_real());
}
