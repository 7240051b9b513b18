//! Small-step reduction by textual substitution.
//!
//! Slow and direct: each step finds the leftmost redex in evaluation position
//! and rewrites it. `indexOf` is the one construct reduced big-step, by
//! recursively normalizing each predicate call.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ops::{Const, OpError};
use crate::sens::{GradualSens, ResourceVar, Sens, SensEnv};
use crate::syntax::Span;
use crate::term::{Term, Var};
use crate::types::{ctrans, interior, Evidence, SType};

use super::machine::{sample_laplace, RuntimeError, DEFAULT_STEP_BUDGET};
use super::value::{Payload, Value};

pub struct Reducer {
    steps: u64,
    budget: u64,
    rng: ChaCha8Rng,
}

type R<T> = Result<T, RuntimeError>;

fn stuck(message: &str, span: Span) -> RuntimeError {
    RuntimeError::Stuck { message: message.to_string(), span }
}

fn inf() -> GradualSens {
    GradualSens::exact(Sens::INF)
}

/// Replaces the evidence and type of a value form.
fn rewrap(v: &Term, ev: Evidence, ty: SType) -> Term {
    match v {
        Term::Const(_, c, _) => Term::Const(ev, *c, ty),
        Term::Lam(_, x, p, b, _) => Term::Lam(ev, x.clone(), p.clone(), b.clone(), ty),
        Term::ResLam(_, r, b, _) => Term::ResLam(ev, r.clone(), b.clone(), ty),
        Term::Pair(_, a, b, _) => Term::Pair(ev, a.clone(), b.clone(), ty),
        Term::Inl(_, a, _) => Term::Inl(ev, a.clone(), ty),
        Term::Inr(_, a, _) => Term::Inr(ev, a.clone(), ty),
        Term::Fold(_, a, _) => Term::Fold(ev, a.clone(), ty),
        Term::List(_, xs, _) => Term::List(ev, xs.clone(), ty),
        _ => unreachable!("rewrap of a non-value"),
    }
}

/// r-ascr on a value.
fn ascribe(v: &Term, ev: &Evidence, ty: SType, span: Span) -> R<Term> {
    let (ve, _) = v.value_parts().ok_or_else(|| stuck("ascription of a non-value", span))?;
    match ctrans(ve, ev) {
        Some(e) => Ok(rewrap(v, e, ty)),
        None => Err(RuntimeError::SensitivityViolation { left: ve.clone(), right: ev.clone(), span }),
    }
}

fn parts(v: &Term) -> (Evidence, SType) {
    let (e, g) = v.value_parts().expect("value");
    (e.clone(), g.clone())
}

fn a(t: Term) -> Arc<Term> {
    Arc::new(t)
}

impl Default for Reducer {
    fn default() -> Self {
        Reducer::new(0)
    }
}

impl Reducer {
    pub fn new(seed: u64) -> Reducer {
        Reducer { steps: 0, budget: DEFAULT_STEP_BUDGET, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    /// Reduces to a value form.
    pub fn normalize(&mut self, t: &Term) -> R<Term> {
        let mut t = t.clone();
        while !t.is_value() {
            self.steps += 1;
            if self.steps > self.budget {
                return Err(RuntimeError::BudgetExhausted { steps: self.budget });
            }
            t = self.step(&t)?;
        }
        Ok(t)
    }

    /// One reduction of a non-value.
    pub fn step(&mut self, t: &Term) -> R<Term> {
        // Congruence: reduce the leftmost non-value in evaluation position.
        macro_rules! sub {
            ($x:expr, $rebuild:expr) => {
                if !$x.is_value() {
                    let s = self.step($x)?;
                    #[allow(clippy::redundant_closure_call)]
                    return Ok($rebuild(a(s)));
                }
            };
        }
        match t {
            Term::Const(..) | Term::Lam(..) => Err(stuck("step of a value", Span::default())),
            Term::Var(x) => Err(stuck(&format!("free variable {:?}", x), Span::default())),
            Term::ResLam(e, r, b, g) => {
                sub!(b, |s| Term::ResLam(e.clone(), r.clone(), s, g.clone()));
                Err(stuck("step of a value", Span::default()))
            }
            Term::Pair(e, x, y, g) => {
                sub!(x, |s| Term::Pair(e.clone(), s, y.clone(), g.clone()));
                sub!(y, |s| Term::Pair(e.clone(), x.clone(), s, g.clone()));
                Err(stuck("step of a value", Span::default()))
            }
            Term::Inl(e, x, g) => {
                sub!(x, |s| Term::Inl(e.clone(), s, g.clone()));
                Err(stuck("step of a value", Span::default()))
            }
            Term::Inr(e, x, g) => {
                sub!(x, |s| Term::Inr(e.clone(), s, g.clone()));
                Err(stuck("step of a value", Span::default()))
            }
            Term::Fold(e, x, g) => {
                sub!(x, |s| Term::Fold(e.clone(), s, g.clone()));
                Err(stuck("step of a value", Span::default()))
            }
            Term::List(e, xs, g) => {
                let i = xs.iter().position(|x| !x.is_value()).ok_or_else(|| stuck("step of a value", Span::default()))?;
                let mut ys = xs.clone();
                ys[i] = a(self.step(&xs[i])?);
                Ok(Term::List(e.clone(), ys, g.clone()))
            }
            Term::Op(op, xs, span) => {
                if let Some(i) = xs.iter().position(|x| !x.is_value()) {
                    let mut ys = xs.clone();
                    ys[i] = a(self.step(&xs[i])?);
                    return Ok(Term::Op(*op, ys, *span));
                }
                let mut cs = Vec::new();
                let mut evs = Vec::new();
                let mut tys = Vec::new();
                for x in xs {
                    let Term::Const(e, c, g) = &**x else { return Err(stuck("operator on a non-constant", *span)) };
                    cs.push(*c);
                    evs.push(e.clone());
                    tys.push(g.clone());
                }
                let c = op.apply(&cs).map_err(|e| match e {
                    OpError::DivisionByZero => RuntimeError::DivisionByZero { span: *span },
                    OpError::Mismatch => stuck("operator mismatch", *span),
                })?;
                let ev = op.result_evidence(&evs).ok_or_else(|| stuck("operator evidence", *span))?;
                let ty = op.result_type(&tys).ok_or_else(|| stuck("operator type", *span))?;
                Ok(Term::Const(ev, c, ty))
            }
            Term::App(f, x, span) => {
                sub!(f, |s| Term::App(s, x.clone(), *span));
                sub!(x, |s| Term::App(f.clone(), s, *span));
                let Term::Lam(e, p, pt, body, g) = &**f else { return Err(stuck("application of a non-function", *span)) };
                let dom = e.i_dom().ok_or_else(|| stuck("function evidence", *span))?;
                let cod = e.i_cod().ok_or_else(|| stuck("function evidence", *span))?;
                let arg = ascribe(x, &dom, pt.clone(), *span)?;
                let body = subst_var(body, p, &arg);
                Ok(Term::Ascr(cod, a(body), g.cod().ok_or_else(|| stuck("function type", *span))?, *span))
            }
            Term::ResApp(f, s, span) => {
                sub!(f, |x| Term::ResApp(x, s.clone(), *span));
                let Term::ResLam(e, r, body, g) = &**f else { return Err(stuck("instantiation of a non-abstraction", *span)) };
                let ev = e.i_inst(s).ok_or_else(|| stuck("inst evidence", *span))?;
                let ty = g.inst(s).ok_or_else(|| stuck("inst type", *span))?;
                let body = subst_res(body, &[(r.clone(), s.clone())]);
                Ok(Term::Ascr(ev, a(body), ty, *span))
            }
            Term::Ascr(e, x, g, span) => {
                sub!(x, |s| Term::Ascr(e.clone(), s, g.clone(), *span));
                ascribe(x, e, g.clone(), *span)
            }
            Term::Fst(x, span) | Term::Snd(x, span) => {
                let first = matches!(t, Term::Fst(..));
                sub!(x, |s| if first { Term::Fst(s, *span) } else { Term::Snd(s, *span) });
                let Term::Pair(e, p, q, g) = &**x else { return Err(stuck("projection of a non-pair", *span)) };
                let (ev, ty, part) =
                    if first { (e.i_first(), g.first(), p) } else { (e.i_second(), g.second(), q) };
                Ok(Term::Ascr(ev.ok_or_else(|| stuck("pair", *span))?, part.clone(), ty.ok_or_else(|| stuck("pair", *span))?, *span))
            }
            Term::Unfold(x, span) => {
                sub!(x, |s| Term::Unfold(s, *span));
                let Term::Fold(e, v, g) = &**x else { return Err(stuck("unfold of a non-fold", *span)) };
                let ev = e.i_unf().ok_or_else(|| stuck("unfold evidence", *span))?;
                let ty = g.unf().ok_or_else(|| stuck("unfold type", *span))?;
                Ok(Term::Ascr(ev, v.clone(), ty, *span))
            }
            Term::Case { scrut, left, right, tys, span } => {
                sub!(scrut, |s| Term::Case {
                    scrut: s,
                    left: left.clone(),
                    right: right.clone(),
                    tys: tys.clone(),
                    span: *span
                });
                let (e1, g1) = parts(scrut);
                let (is_left, inner) = match &**scrut {
                    Term::Inl(_, v, _) => (true, v),
                    Term::Inr(_, v, _) => (false, v),
                    _ => return Err(stuck("case on a non-sum", *span)),
                };
                let (pe, pt) = if is_left { (e1.i_left(), g1.left()) } else { (e1.i_right(), g1.right()) };
                let bound = ascribe(inner, &pe.ok_or_else(|| stuck("sum", *span))?, pt.ok_or_else(|| stuck("sum", *span))?, *span)?;
                let (x, body, gi) = if is_left { (&left.0, &left.1, &tys.left) } else { (&right.0, &right.1, &tys.right) };
                let ev = interior(gi, &tys.join).ok_or_else(|| stuck("branch join", *span))?.join_eff2(&e1.eff2());
                Ok(Term::Ascr(ev, a(subst_var(body, x, &bound)), tys.join.join_eff(&g1.eff()), *span))
            }
            Term::If { cond, then, els, tys, span } => {
                sub!(cond, |s| Term::If {
                    cond: s,
                    then: then.clone(),
                    els: els.clone(),
                    tys: tys.clone(),
                    span: *span
                });
                let Term::Const(e1, Const::Bool(b), g1) = &**cond else { return Err(stuck("if on a non-Boolean", *span)) };
                let gi = if *b { &tys.left } else { &tys.right };
                let ev = interior(gi, &tys.join).ok_or_else(|| stuck("branch join", *span))?.join_eff2(&e1.eff2());
                Ok(Term::Ascr(ev, if *b { then.clone() } else { els.clone() }, tys.join.join_eff(&g1.eff()), *span))
            }
            Term::Fix(f, g, body) => {
                let me = Term::Ascr(Evidence::refl(g), a(t.clone()), g.clone(), Span::default());
                Ok(subst_var(body, f, &me))
            }
            Term::Try(x, h, g) => {
                if x.is_value() {
                    return Ok((**x).clone());
                }
                match self.step(x) {
                    Ok(s) => Ok(Term::Try(a(s), h.clone(), g.clone())),
                    Err(RuntimeError::SensitivityViolation { .. } | RuntimeError::UserError { .. }) => Ok((**h).clone()),
                    Err(e) => Err(e),
                }
            }
            Term::Get(l, i, span) => {
                sub!(l, |s| Term::Get(s, i.clone(), *span));
                sub!(i, |s| Term::Get(l.clone(), s, *span));
                let Term::List(el, xs, gl) = &**l else { return Err(stuck("get on a non-list", *span)) };
                let Term::Const(ei, Const::Real(n), gi) = &**i else { return Err(stuck("non-numeric index", *span)) };
                if n.fract() != 0.0 || *n < 0.0 || *n >= xs.len() as f64 {
                    return Err(RuntimeError::UserError {
                        message: format!("index {} out of bounds for a list of length {}", Const::Real(*n), xs.len()),
                        span: *span,
                    });
                }
                let e2 = ei.eff2();
                let ev = el.i_elem().ok_or_else(|| stuck("list", *span))?.plus_eff2(&(e2.0.scale(inf()), e2.1.scale(inf())));
                let ty = gl.elem().ok_or_else(|| stuck("list", *span))?.plus(&gi.eff().scale(inf()));
                Ok(Term::Ascr(ev, xs[*n as usize].clone(), ty, *span))
            }
            Term::Length(l, span) => {
                sub!(l, |s| Term::Length(s, *span));
                let Term::List(el, xs, gl) = &**l else { return Err(stuck("length of a non-list", *span)) };
                let (lo, hi) = el.eff2();
                let ev = Evidence::new(SType::real(lo.scale(inf())), SType::real(hi.scale(inf())));
                Ok(Term::Const(ev, Const::Real(xs.len() as f64), SType::real(gl.eff().scale(inf()))))
            }
            Term::IndexOf(l, p, g, span) => {
                sub!(l, |s| Term::IndexOf(s, p.clone(), g.clone(), *span));
                sub!(p, |s| Term::IndexOf(l.clone(), s, g.clone(), *span));
                let Term::List(el, xs, gl) = &**l else { return Err(stuck("indexOf on a non-list", *span)) };
                let (ep, _) = parts(p);
                let cod = ep.i_cod().ok_or_else(|| stuck("predicate", *span))?;
                let (l0, l1) = el.eff2();
                let (p0, p1) = ep.eff2();
                let (c0, c1) = cod.eff2();
                let ev = Evidence::new(
                    SType::real(l0.add(&p0).add(&c0).scale(inf())),
                    SType::real(l1.add(&p1).add(&c1).scale(inf())),
                );
                let elem_ev = el.i_elem().ok_or_else(|| stuck("list", *span))?;
                let elem_ty = gl.elem().ok_or_else(|| stuck("list", *span))?;
                for (k, x) in xs.iter().enumerate() {
                    let x = ascribe(x, &elem_ev, elem_ty.clone(), *span)?;
                    let call = Term::App(p.clone(), a(x), *span);
                    match self.normalize(&call)? {
                        Term::Const(_, Const::Bool(true), _) => return Ok(Term::Const(ev, Const::Real(k as f64), g.clone())),
                        Term::Const(_, Const::Bool(false), _) => {}
                        _ => return Err(stuck("indexOf predicate returned a non-Boolean", *span)),
                    }
                }
                Ok(Term::Const(ev, Const::Real(-1.0), g.clone()))
            }
            Term::Laplace(v, scale, eps, span) => {
                sub!(v, |s| Term::Laplace(s, *scale, eps.clone(), *span));
                sub!(eps, |s| Term::Laplace(v.clone(), *scale, s, *span));
                let (Term::Const(_, Const::Real(c), _), Term::Const(_, Const::Real(e), _)) = (&**v, &**eps) else {
                    return Err(stuck("laplace on non-numbers", *span));
                };
                if !(*e > 0.0 && e.is_finite()) {
                    return Err(RuntimeError::UserError {
                        message: format!("laplace epsilon must be positive, got {}", Const::Real(*e)),
                        span: *span,
                    });
                }
                let out = c + sample_laplace(scale.value() / e, &mut self.rng);
                let g = SType::real(SensEnv::empty());
                Ok(Term::Const(Evidence::refl(&g), Const::Real(out), g))
            }
        }
    }
}

/// `[v/x]t`. Variables are unique, so only shadowing by the same binder stops it.
pub fn subst_var(t: &Term, x: &Var, v: &Term) -> Term {
    let s = |b: &Arc<Term>| a(subst_var(b, x, v));
    match t {
        Term::Var(y) if y == x => v.clone(),
        Term::Var(_) | Term::Const(..) => t.clone(),
        Term::Lam(e, y, p, b, g) => {
            if y == x {
                t.clone()
            } else {
                Term::Lam(e.clone(), y.clone(), p.clone(), s(b), g.clone())
            }
        }
        Term::Fix(f, g, b) => {
            if f == x {
                t.clone()
            } else {
                Term::Fix(f.clone(), g.clone(), s(b))
            }
        }
        Term::ResLam(e, r, b, g) => Term::ResLam(e.clone(), r.clone(), s(b), g.clone()),
        Term::Pair(e, p, q, g) => Term::Pair(e.clone(), s(p), s(q), g.clone()),
        Term::Inl(e, p, g) => Term::Inl(e.clone(), s(p), g.clone()),
        Term::Inr(e, p, g) => Term::Inr(e.clone(), s(p), g.clone()),
        Term::Fold(e, p, g) => Term::Fold(e.clone(), s(p), g.clone()),
        Term::List(e, xs, g) => Term::List(e.clone(), xs.iter().map(s).collect(), g.clone()),
        Term::Op(op, xs, sp) => Term::Op(*op, xs.iter().map(s).collect(), *sp),
        Term::App(p, q, sp) => Term::App(s(p), s(q), *sp),
        Term::ResApp(p, e, sp) => Term::ResApp(s(p), e.clone(), *sp),
        Term::Ascr(e, p, g, sp) => Term::Ascr(e.clone(), s(p), g.clone(), *sp),
        Term::Fst(p, sp) => Term::Fst(s(p), *sp),
        Term::Snd(p, sp) => Term::Snd(s(p), *sp),
        Term::Unfold(p, sp) => Term::Unfold(s(p), *sp),
        Term::Case { scrut, left, right, tys, span } => {
            let arm = |(y, b): &(Var, Arc<Term>)| (y.clone(), if y == x { b.clone() } else { s(b) });
            Term::Case { scrut: s(scrut), left: arm(left), right: arm(right), tys: tys.clone(), span: *span }
        }
        Term::If { cond, then, els, tys, span } => {
            Term::If { cond: s(cond), then: s(then), els: s(els), tys: tys.clone(), span: *span }
        }
        Term::Try(p, q, g) => Term::Try(s(p), s(q), g.clone()),
        Term::Get(p, q, sp) => Term::Get(s(p), s(q), *sp),
        Term::Length(p, sp) => Term::Length(s(p), *sp),
        Term::IndexOf(p, q, g, sp) => Term::IndexOf(s(p), s(q), g.clone(), *sp),
        Term::Laplace(p, k, q, sp) => Term::Laplace(s(p), *k, s(q), *sp),
    }
}

/// Capture-avoiding `[Σ/r]t` through every evidence, annotation and effect.
pub fn subst_res(t: &Term, map: &[(ResourceVar, SensEnv)]) -> Term {
    if map.is_empty() {
        return t.clone();
    }
    let s = |b: &Arc<Term>| a(subst_res(b, map));
    let e = |ev: &Evidence| ev.subst_res_map(map);
    let g = |ty: &SType| ty.subst_res_map(map);
    match t {
        Term::Var(_) => t.clone(),
        Term::Const(ev, c, ty) => Term::Const(e(ev), *c, g(ty)),
        Term::Lam(ev, x, p, b, ty) => Term::Lam(e(ev), x.clone(), g(p), s(b), g(ty)),
        Term::ResLam(ev, r, b, ty) => {
            let inner: Vec<_> = map.iter().filter(|(k, _)| k != r).cloned().collect();
            if inner.iter().any(|(_, rhs)| rhs.contains(r)) {
                let r2 = r.refresh();
                let b2 = subst_res(b, &[(r.clone(), SensEnv::unit(r2.clone()))]);
                Term::ResLam(e(ev), r2, a(subst_res(&b2, &inner)), g(ty))
            } else {
                Term::ResLam(e(ev), r.clone(), a(subst_res(b, &inner)), g(ty))
            }
        }
        Term::Pair(ev, p, q, ty) => Term::Pair(e(ev), s(p), s(q), g(ty)),
        Term::Inl(ev, p, ty) => Term::Inl(e(ev), s(p), g(ty)),
        Term::Inr(ev, p, ty) => Term::Inr(e(ev), s(p), g(ty)),
        Term::Fold(ev, p, ty) => Term::Fold(e(ev), s(p), g(ty)),
        Term::List(ev, xs, ty) => Term::List(e(ev), xs.iter().map(s).collect(), g(ty)),
        Term::Op(op, xs, sp) => Term::Op(*op, xs.iter().map(s).collect(), *sp),
        Term::App(p, q, sp) => Term::App(s(p), s(q), *sp),
        Term::ResApp(p, sig, sp) => Term::ResApp(s(p), sig.subst_many(map), *sp),
        Term::Ascr(ev, p, ty, sp) => Term::Ascr(e(ev), s(p), g(ty), *sp),
        Term::Fst(p, sp) => Term::Fst(s(p), *sp),
        Term::Snd(p, sp) => Term::Snd(s(p), *sp),
        Term::Unfold(p, sp) => Term::Unfold(s(p), *sp),
        Term::Fix(f, ty, b) => Term::Fix(f.clone(), g(ty), s(b)),
        Term::Case { scrut, left, right, tys, span } => Term::Case {
            scrut: s(scrut),
            left: (left.0.clone(), s(&left.1)),
            right: (right.0.clone(), s(&right.1)),
            tys: crate::term::Branches { left: g(&tys.left), right: g(&tys.right), join: g(&tys.join) },
            span: *span,
        },
        Term::If { cond, then, els, tys, span } => Term::If {
            cond: s(cond),
            then: s(then),
            els: s(els),
            tys: crate::term::Branches { left: g(&tys.left), right: g(&tys.right), join: g(&tys.join) },
            span: *span,
        },
        Term::Try(p, q, ty) => Term::Try(s(p), s(q), g(ty)),
        Term::Get(p, q, sp) => Term::Get(s(p), s(q), *sp),
        Term::Length(p, sp) => Term::Length(s(p), *sp),
        Term::IndexOf(p, q, ty, sp) => Term::IndexOf(s(p), s(q), g(ty), *sp),
        Term::Laplace(p, k, q, sp) => Term::Laplace(s(p), *k, s(q), *sp),
    }
}

/// Does the machine's value agree with the reducer's value form? Closures and
/// resource abstractions are compared by evidence and type only.
pub fn agrees(v: &Value, t: &Term) -> bool {
    let Some((e, g)) = t.value_parts() else { return false };
    if !(v.ev.alpha_eq(e) && v.ty.alpha_eq(g)) {
        return false;
    }
    match (&v.u, t) {
        (Payload::Const(c), Term::Const(_, d, _)) => c == d,
        (Payload::Closure(_), Term::Lam(..)) | (Payload::ResAbs(..), Term::ResLam(..)) => true,
        (Payload::Pair(x, y), Term::Pair(_, p, q, _)) => agrees(x, p) && agrees(y, q),
        (Payload::Inl(x), Term::Inl(_, p, _)) | (Payload::Inr(x), Term::Inr(_, p, _)) | (Payload::Fold(x), Term::Fold(_, p, _)) => {
            agrees(x, p)
        }
        (Payload::List(xs), Term::List(_, ps, _)) => xs.len() == ps.len() && xs.iter().zip(ps).all(|(x, p)| agrees(x, p)),
        _ => false,
    }
}

/// Normalizes a closed term with the reference reducer.
pub fn reduce(t: &Term, seed: u64) -> R<Term> {
    Reducer::new(seed).normalize(t)
}
