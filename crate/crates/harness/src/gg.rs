//! Gradual guarantees under random widening of sensitivity annotations.

use std::fmt;

use gsens_core::eval::{Machine, Value};
use gsens_core::session::{ItemResult, Session};
use gsens_core::syntax::pretty::program_to_string;
use gsens_core::syntax::{parse_program, EffTerm, Expr, ExprKind, Program, Stmt, TyExpr, TyKind};
use gsens_core::{GradualSens, Sens};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::CorpusProgram;
use crate::mp::TRIAL_STEP_BUDGET;
use crate::target::Target;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GgKind {
    Static,
    Dynamic,
}

#[derive(Clone, Debug)]
pub struct GgCounterexample {
    pub program: String,
    pub widened: String,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct GgReport {
    pub kind: GgKind,
    pub widenings: usize,
    /// Widenings whose original program succeeded, so the guarantee applied.
    pub applicable: usize,
    pub counterexamples: Vec<GgCounterexample>,
}

impl GgReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

impl fmt::Display for GgReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<16} {:?}", "guarantee", self.kind)?;
        writeln!(f, "{:<16} {}", "widenings", self.widenings)?;
        writeln!(f, "{:<16} {}", "applicable", self.applicable)?;
        write!(f, "{:<16} {}", "counterexamples", self.counterexamples.len())?;
        for c in &self.counterexamples {
            write!(f, "\n  {}: {}\n{}", c.program, c.reason, c.widened)?;
        }
        Ok(())
    }
}

fn visit_ty(t: &mut TyExpr, f: &mut dyn FnMut(&mut EffTerm)) {
    t.eff.iter_mut().for_each(&mut *f);
    match &mut t.kind {
        TyKind::Arrow(a, b) | TyKind::Prod(a, b) | TyKind::Sum(a, b) => {
            visit_ty(a, f);
            visit_ty(b, f);
        }
        TyKind::List(a) | TyKind::Forall(_, a) | TyKind::Rec(_, a) => visit_ty(a, f),
        TyKind::Number | TyKind::Boolean | TyKind::Unit | TyKind::Named(_) => {}
    }
}

fn visit_stmt(s: &mut Stmt, f: &mut dyn FnMut(&mut EffTerm)) {
    match s {
        Stmt::Let { ty, value, .. } => {
            if let Some(t) = ty {
                visit_ty(t, f);
            }
            visit_expr(value, f);
        }
        Stmt::Def(d) => {
            for p in &mut d.params {
                visit_ty(&mut p.ty, f);
            }
            if let Some(t) = &mut d.ret {
                visit_ty(t, f);
            }
            visit_expr(&mut d.body, f);
        }
        Stmt::Expr(e) => visit_expr(e, f),
    }
}

fn visit_expr(e: &mut Expr, f: &mut dyn FnMut(&mut EffTerm)) {
    use ExprKind::*;
    match &mut e.kind {
        Num(_) | Bool(_) | Unit | Var(_) => {}
        Template(_, tys) => tys.iter_mut().for_each(|t| visit_ty(t, f)),
        Op(_, xs) => xs.iter_mut().for_each(|x| visit_expr(x, f)),
        List(t, xs) => {
            if let Some(t) = t {
                visit_ty(t, f);
            }
            xs.iter_mut().for_each(|x| visit_expr(x, f));
        }
        Lam(ps, b) => {
            ps.iter_mut().for_each(|p| visit_ty(&mut p.ty, f));
            visit_expr(b, f);
        }
        Call(g, xs) => {
            visit_expr(g, f);
            xs.iter_mut().for_each(|x| visit_expr(x, f));
        }
        ResApp(b, eff) => {
            visit_expr(b, f);
            eff.iter_mut().for_each(&mut *f);
        }
        Ascr(b, t) | Inl(t, b) | Inr(t, b) | Fold(t, b) | Fix(_, t, b) => {
            visit_ty(t, f);
            visit_expr(b, f);
        }
        ResLam(_, b) | Fst(b) | Snd(b) | Unfold(b) | Length(b) => visit_expr(b, f),
        Pair(a, b) | Try(a, b) | Get(a, b) | IndexOf(a, b) => {
            visit_expr(a, f);
            visit_expr(b, f);
        }
        If(a, b, c) | Laplace(a, b, c) => {
            visit_expr(a, f);
            visit_expr(b, f);
            visit_expr(c, f);
        }
        Case { scrut, left, right } => {
            visit_expr(scrut, f);
            visit_expr(&mut left.1, f);
            visit_expr(&mut right.1, f);
        }
        Block(stmts, tail) => {
            stmts.iter_mut().for_each(|s| visit_stmt(s, f));
            if let Some(t) = tail {
                visit_expr(t, f);
            }
        }
    }
}

/// Whether the program uses `try`. A handler can turn a failure of the more
/// precise program into a success with a different value, so the dynamic
/// guarantee only covers programs without it.
pub fn uses_try(prog: &Program) -> bool {
    prog.items.iter().any(stmt_uses_try)
}

fn stmt_uses_try(s: &Stmt) -> bool {
    match s {
        Stmt::Let { value, .. } => expr_uses_try(value),
        Stmt::Def(d) => expr_uses_try(&d.body),
        Stmt::Expr(e) => expr_uses_try(e),
    }
}

fn expr_uses_try(e: &Expr) -> bool {
    use ExprKind::*;
    match &e.kind {
        Try(..) => true,
        Num(_) | Bool(_) | Unit | Var(_) | Template(..) => false,
        Op(_, xs) | List(_, xs) => xs.iter().any(expr_uses_try),
        Call(f, xs) => expr_uses_try(f) || xs.iter().any(expr_uses_try),
        Lam(_, b) | ResLam(_, b) | ResApp(b, _) | Ascr(b, _) | Fst(b) | Snd(b) | Inl(_, b) | Inr(_, b)
        | Fold(_, b) | Unfold(b) | Fix(_, _, b) | Length(b) => expr_uses_try(b),
        Pair(a, b) | Get(a, b) | IndexOf(a, b) => expr_uses_try(a) || expr_uses_try(b),
        If(a, b, c) | Laplace(a, b, c) => [a, b, c].iter().any(|x| expr_uses_try(x)),
        Case { scrut, left, right } => expr_uses_try(scrut) || expr_uses_try(&left.1) || expr_uses_try(&right.1),
        Block(stmts, tail) => stmts.iter().any(stmt_uses_try) || tail.as_ref().is_some_and(|t| expr_uses_try(t)),
    }
}

/// Calls `f` on every sensitivity annotation in the program, including
/// resource instantiations.
pub fn for_each_annotation(prog: &mut Program, f: &mut dyn FnMut(&mut EffTerm)) {
    for s in &mut prog.items {
        visit_stmt(s, f);
    }
}

/// A strictly larger interval than `g`, or `None` for `?`.
pub fn widen_sens(g: GradualSens, rng: &mut impl Rng) -> Option<GradualSens> {
    if g == GradualSens::UNKNOWN {
        return None;
    }
    if rng.random_bool(0.25) {
        return Some(GradualSens::UNKNOWN);
    }
    loop {
        let lo = if g.lo().is_zero() || rng.random_bool(0.5) {
            g.lo()
        } else if g.lo().is_inf() {
            Sens::new(rng.random_range(0..=5) as f64).unwrap()
        } else {
            Sens::new((g.lo().value() * rng.random::<f64>()).floor()).unwrap()
        };
        let hi = if g.hi().is_inf() || rng.random_bool(0.4) {
            g.hi()
        } else if rng.random_bool(0.3) {
            Sens::INF
        } else {
            g.hi().add(Sens::new(rng.random_range(1..=3) as f64).unwrap())
        };
        let w = GradualSens::new(lo, hi).expect("lo ≤ hi");
        if w != g {
            return Some(w);
        }
    }
}

/// Widens a random non-empty subset of the program's widenable annotations.
/// `None` when every annotation is already `?`.
pub fn widen_program(prog: &Program, rng: &mut impl Rng) -> Option<Program> {
    let mut out = prog.clone();
    let mut sites = 0;
    for_each_annotation(&mut out, &mut |t| sites += usize::from(t.coef != GradualSens::UNKNOWN));
    if sites == 0 {
        return None;
    }
    let forced = rng.random_range(0..sites);
    let mut i = 0;
    for_each_annotation(&mut out, &mut |t| {
        if t.coef == GradualSens::UNKNOWN {
            return;
        }
        if i == forced || rng.random_bool(0.3) {
            t.coef = widen_sens(t.coef, rng).expect("widenable");
        }
        i += 1;
    });
    Some(out)
}

fn item_types(r: &[ItemResult]) -> Vec<&gsens_core::SType> {
    r.iter().map(ItemResult::ty).collect()
}

fn check_static(p1: &Program, p2: &Program) -> Result<bool, String> {
    let Ok(r1) = Session::check_only().run_program(p1) else { return Ok(false) };
    let r2 = Session::check_only().run_program(p2).map_err(|e| format!("widened program rejected: {}", e))?;
    for (g1, g2) in item_types(&r1).into_iter().zip(item_types(&r2)) {
        if !g1.precise_in(g2) {
            return Err(format!("type `{}` is not below `{}`", g1, g2));
        }
    }
    Ok(true)
}

/// Inputs shared by both runs of a widened function target.
fn probe_inputs(t: &Target, k: usize) -> Vec<Value> {
    use gsens_core::{Const, Type};
    t.params()
        .enumerate()
        .map(|(i, g)| {
            let c = match g.ty() {
                Some(Type::Real) => Const::Real((i as f64 + 1.0) * (k as f64 - 1.0)),
                Some(Type::Bool) => Const::Bool((i + k) % 2 == 0),
                _ => Const::Unit,
            };
            Value::input(c, g)
        })
        .collect()
}

fn check_dynamic(p1: &Program, p2: &Program, seed: u64) -> Result<bool, String> {
    if uses_try(p1) {
        return Ok(false);
    }
    let r1 = match Session::new().with_seed(seed).run_program(p1) {
        Ok(r) => r,
        Err(_) => return Ok(false),
    };
    let r2 = Session::new()
        .with_seed(seed)
        .run_program(p2)
        .map_err(|e| format!("widened program failed: {}", e))?;
    for (a, b) in r1.iter().zip(&r2) {
        if let (Some(v1), Some(v2)) = (a.value(), b.value()) {
            if !v1.precise_in(v2) {
                return Err(format!("value {} is not below {}", v1, v2));
            }
        }
    }
    // Run function targets on a few fixed inputs built from the original
    // parameter types; the widened run ascribes them to its own types.
    if let (Ok(t1), Ok(t2)) = (Target::from_items(&r1), Target::from_items(&r2)) {
        for k in 0..3 {
            let args = probe_inputs(&t1, k);
            let o1 = t1.apply(&mut Machine::new(seed).with_budget(TRIAL_STEP_BUDGET), &args);
            let Ok(v1) = o1 else { continue };
            match t2.apply(&mut Machine::new(seed).with_budget(TRIAL_STEP_BUDGET), &args) {
                Ok(v2) if v1.precise_in(&v2) => {}
                Ok(v2) => return Err(format!("target result {} is not below {}", v1, v2)),
                Err(e) => return Err(format!("target succeeded with {} before widening, then failed: {}", v1, e)),
            }
        }
    }
    Ok(true)
}

/// Applies `widenings` random widenings spread over `corpus` and checks the
/// static or dynamic gradual guarantee for each.
pub fn gg_fuzz(kind: GgKind, corpus: &[CorpusProgram], widenings: usize, seed: u64) -> GgReport {
    let parsed: Vec<(String, Program)> = corpus
        .iter()
        .filter_map(|p| parse_program(&p.source).ok().map(|prog| (p.name.clone(), prog)))
        .collect();
    let results: Vec<_> = (0..widenings)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let (name, p1) = parsed.choose(&mut rng)?;
            let p2 = widen_program(p1, &mut rng)?;
            let outcome = match kind {
                GgKind::Static => check_static(p1, &p2),
                GgKind::Dynamic => check_dynamic(p1, &p2, rng.random()),
            };
            Some(outcome.map_err(|reason| GgCounterexample {
                program: name.clone(),
                widened: program_to_string(&p2),
                reason,
            }))
        })
        .collect();
    let mut report = GgReport { kind, widenings, applicable: 0, counterexamples: Vec::new() };
    for r in results.into_iter().flatten() {
        match r {
            Ok(true) => report.applicable += 1,
            Ok(false) => {}
            Err(c) => report.counterexamples.push(c),
        }
    }
    report
}
