use std::path::PathBuf;

use gsens_core::sens::SensOp;
use gsens_core::syntax::ast::{EffTerm, Span, TyExpr, TyKind};
use gsens_core::syntax::parse_program;
use gsens_core::syntax::parser::parse_type;
use gsens_core::syntax::pretty::{program_to_string, type_to_string};
use gsens_core::types::{ctrans_sens, interior_sens};
use gsens_core::{interior, stype_join, GradualSens, ResourceVar, SType, Sens, SensEnv, Type};
use proptest::prelude::*;

const INF: f64 = f64::INFINITY;
const ENDPOINTS: [f64; 6] = [0.0, 1.0, 2.0, 3.0, 5.0, INF];
/// Every endpoint plus points strictly between them.
const POINTS: [f64; 11] = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 7.0, INF];

fn interval() -> impl Strategy<Value = GradualSens> {
    (0..ENDPOINTS.len(), 0..ENDPOINTS.len()).prop_map(|(i, j)| {
        let (a, b) = (ENDPOINTS[i.min(j)], ENDPOINTS[i.max(j)]);
        GradualSens::from_f64(a, b).unwrap()
    })
}

fn holds(g: GradualSens, x: f64) -> bool {
    g.lo().value() <= x && x <= g.hi().value()
}

fn points(g: GradualSens) -> impl Iterator<Item = f64> {
    POINTS.into_iter().filter(move |x| holds(g, *x))
}

fn exact(x: f64) -> GradualSens {
    GradualSens::from_f64(x, x).unwrap()
}

/// The smallest interval holding every point of `xs`, or `None` if empty.
fn hull(xs: impl Iterator<Item = f64>) -> Option<GradualSens> {
    let xs: Vec<f64> = xs.collect();
    let lo = xs.iter().copied().fold(INF, f64::min);
    let hi = xs.iter().copied().fold(0.0, f64::max);
    (!xs.is_empty()).then(|| GradualSens::from_f64(lo, hi).unwrap())
}

fn res(name: &str) -> ResourceVar {
    ResourceVar::named(name)
}

fn env() -> impl Strategy<Value = SensEnv> {
    (proptest::option::of(interval()), proptest::option::of(interval())).prop_map(|(a, b)| {
        let mut e = SensEnv::empty();
        if let Some(a) = a {
            e = e.add(&SensEnv::single(res("r"), a));
        }
        if let Some(b) = b {
            e = e.add(&SensEnv::single(res("s"), b));
        }
        e
    })
}

fn static_env() -> impl Strategy<Value = SensEnv> {
    (0u8..4, 0u8..4).prop_map(|(a, b)| {
        SensEnv::single(res("r"), exact(a as f64)).add(&SensEnv::single(res("s"), exact(b as f64)))
    })
}

/// Types of a fixed shape so that pairs are structurally comparable.
fn stype_of(shape: u8) -> BoxedStrategy<SType> {
    match shape {
        0 => env().prop_map(SType::real).boxed(),
        1 => env().prop_map(SType::bool).boxed(),
        2 => (stype_of(0), stype_of(0), env()).prop_map(|(a, b, e)| SType::arrow(a, b, e)).boxed(),
        3 => (stype_of(0), stype_of(1), env()).prop_map(|(a, b, e)| SType::new(Type::Prod(a, b), e)).boxed(),
        _ => (stype_of(2), stype_of(0), env()).prop_map(|(a, b, e)| SType::arrow(a, b, e)).boxed(),
    }
}

fn stype_pair() -> impl Strategy<Value = (SType, SType)> {
    (0u8..5).prop_flat_map(|k| (stype_of(k), stype_of(k)))
}

fn surface_type() -> impl Strategy<Value = TyExpr> {
    let coef = (0..ENDPOINTS.len(), 0..ENDPOINTS.len(), any::<bool>()).prop_map(|(i, j, unknown)| {
        if unknown {
            GradualSens::UNKNOWN
        } else {
            GradualSens::from_f64(ENDPOINTS[i.min(j)], ENDPOINTS[i.max(j)]).unwrap()
        }
    });
    let eff = proptest::collection::vec((coef, prop_oneof![Just("r"), Just("s")]), 0..3).prop_map(|ts| {
        let mut seen = Vec::new();
        ts.into_iter()
            .filter(|(_, r)| {
                let fresh = !seen.contains(r);
                seen.push(*r);
                fresh
            })
            .filter(|(coef, _)| !coef.is_zero())
            .map(|(coef, r)| EffTerm { coef, res: r.to_string(), span: Span::default() })
            .collect::<Vec<_>>()
    });
    let leaf = (prop_oneof![Just(TyKind::Number), Just(TyKind::Boolean), Just(TyKind::Unit)], eff.clone())
        .prop_map(|(kind, eff)| TyExpr { kind, eff, span: Span::default() });
    leaf.prop_recursive(3, 12, 2, move |inner| {
        let b = |t| Box::new(t);
        (
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(move |(x, y)| TyKind::Arrow(b(x), b(y))),
                (inner.clone(), inner.clone()).prop_map(move |(x, y)| TyKind::Prod(b(x), b(y))),
                (inner.clone(), inner.clone()).prop_map(move |(x, y)| TyKind::Sum(b(x), b(y))),
                inner.clone().prop_map(move |x| TyKind::List(b(x))),
            ],
            eff.clone(),
        )
            .prop_map(|(kind, eff)| TyExpr { kind, eff, span: Span::default() })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn interval_operations_are_sound(a in interval(), b in interval()) {
        for x in points(a) {
            for y in points(b) {
                let (sx, sy) = (Sens::new(x).unwrap(), Sens::new(y).unwrap());
                prop_assert!(holds(a.add(b), sx.add(sy).value()));
                prop_assert!(holds(a.mul(b), sx.mul(sy).value()));
                prop_assert!(holds(a.join(b), x.max(y)));
            }
        }
        prop_assert_eq!(GradualSens::apply(SensOp::Join, a, b), Some(a.join(b)));
    }

    #[test]
    fn interval_operations_are_tight_on_endpoints(a in interval(), b in interval()) {
        let ends = |g: GradualSens| [g.lo(), g.hi()];
        let sums = hull(ends(a).into_iter().flat_map(|x| ends(b).map(|y| x.add(y).value())));
        prop_assert_eq!(sums, Some(a.add(b)));
        let maxes = hull(ends(a).into_iter().flat_map(|x| ends(b).map(|y| x.value().max(y.value()))));
        prop_assert_eq!(maxes, Some(a.join(b)));
    }

    #[test]
    fn precision_is_a_partial_order(a in interval(), b in interval(), c in interval()) {
        prop_assert!(a.precise_in(a));
        prop_assert!(a.precise_in(GradualSens::UNKNOWN));
        if a.precise_in(b) && b.precise_in(a) {
            prop_assert_eq!(a, b);
        }
        if a.precise_in(b) && b.precise_in(c) {
            prop_assert!(a.precise_in(c));
        }
    }

    #[test]
    fn meet_is_the_intersection(a in interval(), b in interval()) {
        let inside = hull(POINTS.into_iter().filter(|x| holds(a, *x) && holds(b, *x)));
        prop_assert_eq!(a.meet(b), inside);
    }

    /// The interior is exactly the projections of the plausible pairs.
    #[test]
    fn interior_is_sound_and_optimal(a in interval(), b in interval()) {
        let pairs: Vec<(f64, f64)> =
            points(a).flat_map(|x| points(b).filter(move |y| x <= *y).map(move |y| (x, y))).collect();
        let expect = hull(pairs.iter().map(|p| p.0)).zip(hull(pairs.iter().map(|p| p.1)));
        prop_assert_eq!(interior_sens(a, b), expect);
    }

    /// On evidence chains, consistent transitivity keeps exactly the end
    /// points of the plausible triples.
    #[test]
    fn ctrans_on_chains_is_sound_and_optimal(a in interval(), b in interval(), c in interval()) {
        let (Some(e1), Some(e2)) = (interior_sens(a, b), interior_sens(b, c)) else { return Ok(()) };
        let mut triples = Vec::new();
        for x in points(a) {
            for y in points(b).filter(|y| x <= *y) {
                for z in points(c).filter(|z| y <= *z) {
                    triples.push((x, z));
                }
            }
        }
        let expect = hull(triples.iter().map(|t| t.0)).zip(hull(triples.iter().map(|t| t.1)));
        prop_assert_eq!(ctrans_sens(e1, e2), expect);
    }

    #[test]
    fn ctrans_is_monotone_in_precision(
        a in interval(), b in interval(), c in interval(),
        na in interval(), nb in interval(), nc in interval(),
    ) {
        let (Some(w1), Some(w2)) = (interior_sens(a, b), interior_sens(b, c)) else { return Ok(()) };
        let narrow = |g: GradualSens, n: GradualSens| g.meet(n).unwrap_or(g);
        let p1 = (narrow(w1.0, na), narrow(w1.1, nb));
        let p2 = (narrow(w2.0, nb), narrow(w2.1, nc));
        if let Some(p) = ctrans_sens(p1, p2) {
            let w = ctrans_sens(w1, w2);
            prop_assert!(w.is_some());
            let w = w.unwrap();
            prop_assert!(p.0.precise_in(w.0) && p.1.precise_in(w.1));
        }
    }

    #[test]
    fn type_interior_refines_both_sides((g1, g2) in stype_pair()) {
        if let Some(e) = interior(&g1, &g2) {
            prop_assert!(e.lhs.precise_in(&g1), "{} not below {}", e.lhs, g1);
            prop_assert!(e.rhs.precise_in(&g2), "{} not below {}", e.rhs, g2);
            prop_assert!(g1.consistent_sub(&g2));
        } else {
            prop_assert!(!g1.consistent_sub(&g2));
        }
        prop_assert!(interior(&g1, &g1).is_some());
    }

    #[test]
    fn join_bounds_both_branches(e1 in env(), e2 in env()) {
        let (g1, g2) = (SType::real(e1), SType::real(e2));
        let j = stype_join(&g1, &g2).unwrap();
        prop_assert!(g1.consistent_sub(&j) && g2.consistent_sub(&j));
        for r in [res("r"), res("s")] {
            prop_assert_eq!(j.eff().get(&r), g1.eff().get(&r).join(g2.eff().get(&r)));
        }
    }

    /// Substituting `Σ'` for `r` and then measuring at `Δ` is measuring at
    /// `Δ` extended with `r ↦ Σ'·Δ`.
    #[test]
    fn substitution_commutes_with_measurement(sigma in static_env(), repl in static_env(), dr in 0u8..4, ds in 0u8..4) {
        let r = res("r");
        let delta = SensEnv::single(r.clone(), exact(dr as f64)).add(&SensEnv::single(res("s"), exact(ds as f64)));
        let inner = repl.dot(&delta);
        let outer = SensEnv::single(r.clone(), inner).add(&SensEnv::single(res("s"), exact(ds as f64)));
        prop_assert_eq!(sigma.subst(&r, &repl).dot(&delta), sigma.dot(&outer));
        prop_assert_eq!(sigma.subst(&r, &SensEnv::unit(r.clone())), sigma.clone());
        prop_assert_eq!(sigma.subst(&res("t"), &repl), sigma);
    }

    #[test]
    /// Zero coefficients are dropped by normalization, so they are not generated.
    fn types_print_and_reparse(t in surface_type()) {
        let printed = type_to_string(&t);
        let back = parse_type(&printed).map_err(|e| TestCaseError::fail(format!("{}: {}", printed, e)))?;
        prop_assert_eq!(type_to_string(&back), printed);
    }
}

#[test]
fn corpus_programs_print_and_reparse() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut n = 0;
    for dir in ["mp", "worked"] {
        for f in std::fs::read_dir(root.join(dir)).unwrap() {
            let src = std::fs::read_to_string(f.unwrap().path()).unwrap();
            let once = program_to_string(&parse_program(&src).unwrap());
            let twice = program_to_string(&parse_program(&once).unwrap_or_else(|e| panic!("{}\n{}", once, e)));
            assert_eq!(once, twice);
            n += 1;
        }
    }
    assert!(n >= 70);
}
