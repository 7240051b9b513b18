use gsens_core::session::Session;
use gsens_core::syntax::parse_program;
use gsens_core::GradualSens;
use gsens_harness::corpus::{mp_corpus, worked_corpus};
use gsens_harness::gg::{for_each_annotation, widen_program, widen_sens};
use gsens_harness::{gg_fuzz, uses_try, CorpusProgram, GgKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn corpus() -> Vec<CorpusProgram> {
    let mut c = mp_corpus().unwrap();
    c.extend(worked_corpus().unwrap());
    c
}

#[test]
fn widening_strictly_enlarges() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for (lo, hi) in [(0.0, 0.0), (1.0, 1.0), (2.0, 5.0), (3.0, f64::INFINITY), (0.0, 4.0), (f64::INFINITY, f64::INFINITY)] {
        let g = GradualSens::from_f64(lo, hi).unwrap();
        for _ in 0..100 {
            let w = widen_sens(g, &mut rng).unwrap();
            assert!(g.precise_in(w) && g != w, "{} -> {}", g, w);
        }
    }
    assert!(widen_sens(GradualSens::UNKNOWN, &mut rng).is_none());
}

#[test]
fn widened_programs_are_less_precise_everywhere() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let prog = parse_program("def f[r](x: Number[r]): Number[2r] = (x + x) :: Number[1..3r];").unwrap();
    let before = collect(&prog);
    for _ in 0..50 {
        let after = collect(&widen_program(&prog, &mut rng).unwrap());
        assert!(before.iter().zip(&after).all(|(a, b)| a.precise_in(*b)));
        assert!(before != after);
    }
    let unknown = parse_program("def f[r](x: Number[?r]): Number[?r] = x;").unwrap();
    assert!(widen_program(&unknown, &mut rng).is_none());
}

fn collect(p: &gsens_core::syntax::Program) -> Vec<GradualSens> {
    let mut out = Vec::new();
    for_each_annotation(&mut p.clone(), &mut |t| out.push(t.coef));
    out
}

#[test]
fn widening_unknown_ascription_preserves_success() {
    let src = "let res r = 1; (r + r) :: Number[2r]";
    let c = CorpusProgram { name: "ascribe".into(), source: src.into() };
    let report = gg_fuzz(GgKind::Dynamic, &[c], 50, 2);
    assert!(report.passed(), "{}", report);
    assert_eq!(report.applicable, 50);
}

#[test]
fn static_gradual_guarantee_over_the_corpus() {
    let report = gg_fuzz(GgKind::Static, &corpus(), 1000, 17);
    assert!(report.passed(), "{}", report);
    assert!(report.applicable > 800, "{}", report);
}

#[test]
fn dynamic_gradual_guarantee_over_the_corpus() {
    let report = gg_fuzz(GgKind::Dynamic, &corpus(), 1000, 19);
    assert!(report.passed(), "{}", report);
    assert!(report.applicable > 500, "{}", report);
}

#[test]
fn table_success_rows_survive_widening() {
    let rows: Vec<_> = worked_corpus()
        .unwrap()
        .into_iter()
        .filter(|p| ["table_3r_h", "table_unknown_g", "table_unknown_h", "table_0-3r_g", "table_0-3r_h", "table_1-3r_g", "table_1-3r_h"].contains(&p.name.as_str()))
        .collect();
    assert_eq!(rows.len(), 7);
    let report = gg_fuzz(GgKind::Dynamic, &rows, 300, 23);
    assert!(report.passed(), "{}", report);
    assert_eq!(report.applicable, 300);
}

#[test]
fn try_handlers_are_outside_the_dynamic_guarantee() {
    let narrow = "let res r = 1; try { (r + r) :: Number[?r] :: Number[r] } catch { 0 }";
    let wide = "let res r = 1; try { (r + r) :: Number[?r] :: Number[[0,4]r] } catch { 0 }";
    let v1 = Session::new().run_last(narrow).unwrap().unwrap();
    let v2 = Session::new().run_last(wide).unwrap().unwrap();
    assert_eq!(v1.value().unwrap().as_real(), Some(0.0));
    assert_eq!(v2.value().unwrap().as_real(), Some(2.0));
    assert!(uses_try(&parse_program(narrow).unwrap()));
    assert!(!uses_try(&parse_program("let res r = 1; r + r").unwrap()));
}
