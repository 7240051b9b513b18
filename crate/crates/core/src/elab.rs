//! Type-directed elaboration of GS expressions into evidence-carrying terms.
//!
//! `synth` infers a type; `check` pushes an expected type into conditionals,
//! blocks and list literals so that each branch is ascribed on its own before
//! the branches are joined. Callers always ascribe the result of `check`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::ops::Const;
use crate::sens::{GradualSens, ResourceVar, Sens, SensEnv};
use crate::syntax::desugar::{GExpr, GKind, TopItem};
use crate::syntax::{EffExpr, Span, TyExpr, TyKind};
use crate::term::{Branches, Term, Var};
use crate::types::{interior, stype_join, Evidence, Polarity, RecVar, SType, Type};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ErrorCode {
    UnboundVariable,
    UnboundResource,
    UnboundTypeVariable,
    Desugar,
    ConstructorMismatch,
    PlausibilityRefuted,
    NotAFunction,
    NotAResourceAbstraction,
    NotAPair,
    NotASum,
    NotRecursive,
    NotAList,
    OperatorMismatch,
    NoJoin,
    FixBody,
    IllFormed,
    LaplaceScale,
}

impl ErrorCode {
    pub fn code(self) -> &'static str {
        match self {
            ErrorCode::UnboundVariable => "E001",
            ErrorCode::UnboundResource => "E002",
            ErrorCode::UnboundTypeVariable => "E003",
            ErrorCode::Desugar => "E004",
            ErrorCode::ConstructorMismatch => "E010",
            ErrorCode::PlausibilityRefuted => "E011",
            ErrorCode::NotAFunction => "E020",
            ErrorCode::NotAResourceAbstraction => "E021",
            ErrorCode::NotAPair => "E022",
            ErrorCode::NotASum => "E023",
            ErrorCode::NotRecursive => "E024",
            ErrorCode::NotAList => "E025",
            ErrorCode::OperatorMismatch => "E030",
            ErrorCode::NoJoin => "E031",
            ErrorCode::FixBody => "E040",
            ErrorCode::IllFormed => "E041",
            ErrorCode::LaplaceScale => "E042",
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct TypeError {
    pub span: Span,
    pub code: ErrorCode,
    pub message: String,
    pub expected: Option<SType>,
    pub found: Option<SType>,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl TypeError {
    fn new(span: Span, code: ErrorCode, message: impl Into<String>) -> TypeError {
        TypeError { span, code, message: message.into(), expected: None, found: None }
    }

    fn types(mut self, expected: &SType, found: &SType) -> TypeError {
        self.expected = Some(expected.clone());
        self.found = Some(found.clone());
        self
    }
}

type TResult<T> = Result<T, TypeError>;

/// `Γ; Ξ`, plus the scope of recursive type variables.
#[derive(Clone, Default)]
pub struct TypeEnv {
    vars: Vec<(String, Var, SType)>,
    res: Vec<(String, ResourceVar)>,
    recs: Vec<(String, RecVar)>,
}

/// Every free resource of `g` is in `xi` and every recursive variable is bound.
pub fn well_formed(xi: &[ResourceVar], g: &SType) -> bool {
    g.free_recvars().is_empty() && g.free_resources().iter().all(|r| xi.contains(r))
}

impl TypeEnv {
    pub fn new() -> TypeEnv {
        TypeEnv::default()
    }

    pub fn bind_var(&mut self, name: &str, g: SType) -> Var {
        let v = Var::fresh(name);
        self.vars.push((name.to_string(), v.clone(), g));
        v
    }

    pub fn bind_existing(&mut self, name: &str, v: Var, g: SType) {
        self.vars.push((name.to_string(), v, g));
    }

    pub fn bind_resource(&mut self, name: &str, r: ResourceVar) {
        self.res.push((name.to_string(), r));
    }

    pub fn lookup_var(&self, name: &str) -> Option<(&Var, &SType)> {
        self.vars.iter().rev().find(|(n, _, _)| n == name).map(|(_, v, g)| (v, g))
    }

    pub fn lookup_resource(&self, name: &str) -> Option<&ResourceVar> {
        self.res.iter().rev().find(|(n, _)| n == name).map(|(_, r)| r)
    }

    pub fn has_resource_named(&self, name: &str) -> bool {
        self.res.iter().any(|(n, _)| n == name)
    }

    /// `Ξ`.
    pub fn resources(&self) -> Vec<ResourceVar> {
        self.res.iter().map(|(_, r)| r.clone()).collect()
    }

    pub fn vars(&self) -> impl Iterator<Item = (&str, &Var, &SType)> {
        self.vars.iter().map(|(n, v, g)| (n.as_str(), v, g))
    }

    fn mark(&self) -> (usize, usize, usize) {
        (self.vars.len(), self.res.len(), self.recs.len())
    }

    fn reset(&mut self, m: (usize, usize, usize)) {
        self.vars.truncate(m.0);
        self.res.truncate(m.1);
        self.recs.truncate(m.2);
    }

    pub fn well_formed(&self, g: &SType) -> bool {
        well_formed(&self.resources(), g)
    }

    // ---- types ------------------------------------------------------------

    pub fn resolve_eff(&self, eff: &EffExpr) -> TResult<SensEnv> {
        let mut out = SensEnv::empty();
        for t in eff {
            let Some(r) = self.lookup_resource(&t.res) else {
                return Err(TypeError::new(t.span, ErrorCode::UnboundResource, format!("unbound resource `{}`", t.res)));
            };
            out = out.add(&SensEnv::single(r.clone(), t.coef));
        }
        Ok(out)
    }

    pub fn resolve(&mut self, t: &TyExpr) -> TResult<SType> {
        let eff = self.resolve_eff(&t.eff)?;
        let ty = match &t.kind {
            TyKind::Number => Type::Real,
            TyKind::Boolean => Type::Bool,
            TyKind::Unit => Type::Unit,
            TyKind::Named(n) => {
                let Some((_, a)) = self.recs.iter().rev().find(|(k, _)| k == n) else {
                    return Err(TypeError::new(t.span, ErrorCode::UnboundTypeVariable, format!("unknown type `{}`", n)));
                };
                if !eff.is_empty() {
                    return Err(TypeError::new(
                        t.span,
                        ErrorCode::IllFormed,
                        format!("recursive variable `{}` cannot carry an effect", n),
                    ));
                }
                return Ok(SType::Var(a.clone()));
            }
            TyKind::Arrow(a, b) => Type::Arrow(self.resolve(a)?, self.resolve(b)?),
            TyKind::Prod(a, b) => Type::Prod(self.resolve(a)?, self.resolve(b)?),
            TyKind::Sum(a, b) => Type::Sum(self.resolve(a)?, self.resolve(b)?),
            TyKind::List(a) => Type::List(self.resolve(a)?),
            TyKind::Forall(r, b) => {
                let rv = ResourceVar::fresh(r);
                let m = self.mark();
                self.res.push((r.clone(), rv.clone()));
                let body = self.resolve(b);
                self.reset(m);
                Type::Forall(rv, body?)
            }
            TyKind::Rec(a, b) => {
                let av = RecVar::fresh(a);
                let m = self.mark();
                self.recs.push((a.clone(), av.clone()));
                let body = self.resolve(b);
                self.reset(m);
                Type::Rec(av, body?)
            }
        };
        Ok(SType::new(ty, eff))
    }

    // ---- elaboration ------------------------------------------------------

    /// Elaborates `e`; the environment is unchanged afterwards.
    pub fn elaborate(&mut self, e: &GExpr) -> TResult<(Term, SType)> {
        let m = self.mark();
        let r = self.synth(e);
        self.reset(m);
        r
    }

    pub fn typecheck(&mut self, e: &GExpr) -> TResult<SType> {
        self.elaborate(e).map(|(_, g)| g)
    }

    /// Elaborates `e` against `expected` and ascribes the result to it.
    pub fn elaborate_at(&mut self, e: &GExpr, expected: &SType) -> TResult<Term> {
        let m = self.mark();
        let r = self.check(e, expected).and_then(|(t, g)| ascribe(t, &g, expected, e.span));
        self.reset(m);
        r
    }

    fn synth(&mut self, e: &GExpr) -> TResult<(Term, SType)> {
        self.elab(e, None)
    }

    fn check(&mut self, e: &GExpr, expected: &SType) -> TResult<(Term, SType)> {
        self.elab(e, Some(expected))
    }

    fn check_ascribed(&mut self, e: &GExpr, expected: &SType) -> TResult<Term> {
        let (t, g) = self.check(e, expected)?;
        ascribe(t, &g, expected, e.span)
    }

    /// A branch, ascribed to `expected` when there is one.
    fn branch(&mut self, e: &GExpr, expected: Option<&SType>) -> TResult<(Term, SType)> {
        match expected {
            Some(g) => Ok((self.check_ascribed(e, g)?, g.clone())),
            None => self.synth(e),
        }
    }

    fn elab(&mut self, e: &GExpr, expected: Option<&SType>) -> TResult<(Term, SType)> {
        let span = e.span;
        match &e.kind {
            GKind::Const(c) => {
                let g = SType::pure(c.base_type());
                Ok((Term::Const(Evidence::refl(&g), *c, g.clone()), g))
            }
            GKind::Var(x) => match self.lookup_var(x) {
                Some((v, g)) => Ok((Term::Var(v.clone()), g.clone())),
                None => Err(TypeError::new(span, ErrorCode::UnboundVariable, format!("unbound variable `{}`", x))),
            },
            GKind::Op(op, args) => {
                let mut terms = Vec::new();
                let mut tys = Vec::new();
                for a in args {
                    let (t, g) = self.synth(a)?;
                    terms.push(Arc::new(t));
                    tys.push(g);
                }
                match op.result_type(&tys) {
                    Some(g) => Ok((Term::Op(*op, terms, span), g)),
                    None => Err(TypeError::new(
                        span,
                        ErrorCode::OperatorMismatch,
                        format!(
                            "operator `{}` cannot be applied to {}",
                            op.symbol(),
                            tys.iter().map(|g| format!("`{}`", g)).collect::<Vec<_>>().join(" and ")
                        ),
                    )),
                }
            }
            GKind::Lam(x, ty, body) => {
                let g1 = self.resolve(ty)?;
                let m = self.mark();
                let v = self.bind_var(x, g1.clone());
                let r = self.synth(body);
                self.reset(m);
                let (tb, g2) = r?;
                let g = SType::arrow(g1.clone(), g2, SensEnv::empty());
                Ok((Term::Lam(Evidence::refl(&g), v, g1, Arc::new(tb), g.clone()), g))
            }
            GKind::App(f, a) => {
                let (tf, gf) = self.synth(f)?;
                self.apply(tf, gf, a, None, span)
            }
            GKind::ResLam(r, body) => {
                let rv = ResourceVar::fresh(r);
                let m = self.mark();
                self.bind_resource(r, rv.clone());
                let res = self.synth(body);
                self.reset(m);
                let (tb, g1) = res?;
                let g = SType::pure(Type::Forall(rv.clone(), g1));
                Ok((Term::ResLam(Evidence::refl(&g), rv, Arc::new(tb), g.clone()), g))
            }
            GKind::ResApp(f, eff) => {
                let (tf, gf) = self.synth(f)?;
                let s = self.resolve_eff(eff)?;
                self.instantiate(tf, gf, s, span)
            }
            GKind::AutoCall { callee, explicit, auto, args } => {
                let (mut t, mut g) = self.synth(callee)?;
                for eff in explicit {
                    let s = self.resolve_eff(eff)?;
                    (t, g) = self.instantiate(t, g, s, span)?;
                }
                let mut cached: Vec<Option<(Term, SType)>> = vec![None; args.len()];
                for &i in auto {
                    let (ta, ga) = self.synth(&args[i])?;
                    (t, g) = self.instantiate(t, g, ga.eff(), span)?;
                    cached[i] = Some((ta, ga));
                }
                for (a, c) in args.iter().zip(cached) {
                    (t, g) = self.apply(t, g, a, c, span)?;
                }
                Ok((t, g))
            }
            GKind::Ascr(inner, ty) => {
                let g = self.resolve(ty)?;
                let t = self.check_ascribed(inner, &g)?;
                Ok((t, g))
            }
            GKind::Pair(a, b) => {
                let (ta, ga) = self.synth(a)?;
                let (tb, gb) = self.synth(b)?;
                let g = SType::pure(Type::Prod(ga, gb));
                Ok((Term::Pair(Evidence::refl(&g), Arc::new(ta), Arc::new(tb), g.clone()), g))
            }
            GKind::Fst(a) | GKind::Snd(a) => {
                let (ta, ga) = self.synth(a)?;
                let first = matches!(e.kind, GKind::Fst(_));
                let proj = if first { ga.first() } else { ga.second() };
                let Some(g) = proj else {
                    return Err(TypeError::new(span, ErrorCode::NotAPair, format!("expected a pair, found `{}`", ga)));
                };
                let t = if first { Term::Fst(Arc::new(ta), span) } else { Term::Snd(Arc::new(ta), span) };
                Ok((t, g))
            }
            GKind::Inl(other, a) | GKind::Inr(other, a) => {
                let (ta, ga) = self.synth(a)?;
                let go = self.resolve(other)?;
                let left = matches!(e.kind, GKind::Inl(..));
                let g = if left { SType::pure(Type::Sum(ga, go)) } else { SType::pure(Type::Sum(go, ga)) };
                let ev = Evidence::refl(&g);
                let t = if left { Term::Inl(ev, Arc::new(ta), g.clone()) } else { Term::Inr(ev, Arc::new(ta), g.clone()) };
                Ok((t, g))
            }
            GKind::Case { scrut, left, right } => {
                let (ts, gs) = self.synth(scrut)?;
                let (Some(gl), Some(gr)) = (gs.left(), gs.right()) else {
                    return Err(TypeError::new(span, ErrorCode::NotASum, format!("expected a sum, found `{}`", gs)));
                };
                let m = self.mark();
                let xv = self.bind_var(&left.0, gl);
                let l = self.branch(&left.1, expected);
                self.reset(m);
                let (tl, g2) = l?;
                let yv = self.bind_var(&right.0, gr);
                let r = self.branch(&right.1, expected);
                self.reset(m);
                let (tr, g3) = r?;
                let join = join(&g2, &g3, span)?;
                let result = join.join_eff(&gs.eff());
                let tys = Branches { left: g2, right: g3, join };
                Ok((
                    Term::Case {
                        scrut: Arc::new(ts),
                        left: (xv, Arc::new(tl)),
                        right: (yv, Arc::new(tr)),
                        tys,
                        span,
                    },
                    result,
                ))
            }
            GKind::Fold(ty, a) => {
                let g = self.resolve(ty)?;
                let Some(gu) = g.unf() else {
                    return Err(TypeError::new(
                        span,
                        ErrorCode::NotRecursive,
                        format!("fold expects a recursive type, found `{}`", g),
                    ));
                };
                let ta = self.check_ascribed(a, &gu)?;
                Ok((Term::Fold(Evidence::refl(&g), Arc::new(ta), g.clone()), g))
            }
            GKind::Unfold(a) => {
                let (ta, ga) = self.synth(a)?;
                let Some(g) = ga.unf() else {
                    return Err(TypeError::new(
                        span,
                        ErrorCode::NotRecursive,
                        format!("unfold expects a recursive type, found `{}`", ga),
                    ));
                };
                Ok((Term::Unfold(Arc::new(ta), span), g))
            }
            GKind::Fix(f, ty, body) => {
                if !is_fix_body(body) {
                    return Err(TypeError::new(
                        span,
                        ErrorCode::FixBody,
                        "the body of a fixpoint must be a function or resource abstraction",
                    ));
                }
                let g = self.resolve(ty)?;
                let m = self.mark();
                let fv = self.bind_var(f, g.clone());
                let r = self.check_ascribed(body, &g);
                self.reset(m);
                Ok((Term::Fix(fv, g.clone(), Arc::new(r?)), g))
            }
            GKind::If(c, a, b) => {
                let (tc, gc) = self.synth(c)?;
                if !matches!(gc.ty(), Some(Type::Bool)) {
                    return Err(TypeError::new(
                        c.span,
                        ErrorCode::OperatorMismatch,
                        format!("condition must be a Boolean, found `{}`", gc),
                    )
                    .types(&SType::bool(SensEnv::empty()), &gc));
                }
                let (ta, g2) = self.branch(a, expected)?;
                let (tb, g3) = self.branch(b, expected)?;
                let join = join(&g2, &g3, span)?;
                let result = join.join_eff(&gc.eff());
                let tys = Branches { left: g2, right: g3, join };
                Ok((Term::If { cond: Arc::new(tc), then: Arc::new(ta), els: Arc::new(tb), tys, span }, result))
            }
            GKind::Try(a, b) => {
                let (ta, g1) = self.branch(a, expected)?;
                let (tb, g2) = self.branch(b, expected)?;
                let j = join(&g1, &g2, span)?;
                let ta = ascribe(ta, &g1, &j, a.span)?;
                let tb = ascribe(tb, &g2, &j, b.span)?;
                Ok((Term::Try(Arc::new(ta), Arc::new(tb), j.clone()), j))
            }
            GKind::Let { name, ty, value, body } => {
                let (arg, g1) = match ty {
                    Some(ty) => {
                        let g1 = self.resolve(ty)?;
                        (self.check_ascribed(value, &g1)?, g1)
                    }
                    None => {
                        let (tv, g1) = self.synth(value)?;
                        (ascribe(tv, &g1, &g1, value.span)?, g1)
                    }
                };
                let m = self.mark();
                let v = self.bind_var(name, g1.clone());
                let r = self.elab(body, expected);
                self.reset(m);
                let (tb, g2) = r?;
                let fg = SType::arrow(g1.clone(), g2.clone(), SensEnv::empty());
                let lam = Term::Lam(Evidence::refl(&fg), v, g1, Arc::new(tb), fg);
                Ok((Term::App(Arc::new(lam), Arc::new(arg), span), g2))
            }
            GKind::LetRes { name, value, body } => {
                let (tv, gv) = self.synth(value)?;
                let rv = ResourceVar::fresh(name);
                let gx = gv.with_eff(SensEnv::unit(rv.clone()));
                let arg = ascribe(tv, &gv, &gx, value.span)?;
                let m = self.mark();
                self.bind_resource(name, rv.clone());
                let v = self.bind_var(name, gx.clone());
                let r = self.elab(body, expected);
                self.reset(m);
                let (tb, g2) = r?;
                let fg = SType::arrow(gx.clone(), g2.clone(), SensEnv::empty());
                let lam = Term::Lam(Evidence::refl(&fg), v, gx, Arc::new(tb), fg);
                let inner = Term::App(Arc::new(lam), Arc::new(arg), span);
                let hg = SType::pure(Type::Forall(rv.clone(), g2));
                let abs = Term::ResLam(Evidence::refl(&hg), rv, Arc::new(inner), hg.clone());
                self.instantiate(abs, hg, SensEnv::empty(), span)
            }
            GKind::List(ann, elems) => {
                let pushed = match (ann, expected.and_then(|g| g.ty())) {
                    (Some(t), _) => Some(self.resolve(t)?),
                    (None, Some(Type::List(ge))) => Some(ge.clone()),
                    _ => None,
                };
                let (terms, ge) = match pushed {
                    Some(ge) => {
                        let ts = elems.iter().map(|x| self.check_ascribed(x, &ge)).collect::<TResult<Vec<_>>>()?;
                        (ts, ge)
                    }
                    None => {
                        let mut synthed = Vec::new();
                        for x in elems {
                            synthed.push(self.synth(x)?);
                        }
                        let Some(first) = synthed.first() else {
                            return Err(TypeError::new(
                                span,
                                ErrorCode::IllFormed,
                                "an empty list literal needs an element type annotation",
                            ));
                        };
                        let mut ge = first.1.clone();
                        for (_, g) in &synthed[1..] {
                            ge = join(&ge, g, span)?;
                        }
                        let ts = synthed
                            .into_iter()
                            .zip(elems)
                            .map(|((t, g), x)| ascribe(t, &g, &ge, x.span))
                            .collect::<TResult<Vec<_>>>()?;
                        (ts, ge)
                    }
                };
                let g = SType::pure(Type::List(ge));
                Ok((Term::List(Evidence::refl(&g), terms.into_iter().map(Arc::new).collect(), g.clone()), g))
            }
            GKind::Get(l, i) => {
                let (tl, gl) = self.synth(l)?;
                let Some(elem) = gl.elem() else {
                    return Err(TypeError::new(span, ErrorCode::NotAList, format!("expected a list, found `{}`", gl)));
                };
                let (ti, gi) = self.synth(i)?;
                require_real(&gi, i.span)?;
                let g = elem.plus(&gi.eff().scale(inf()));
                Ok((Term::Get(Arc::new(tl), Arc::new(ti), span), g))
            }
            GKind::Length(l) => {
                let (tl, gl) = self.synth(l)?;
                if gl.elem().is_none() {
                    return Err(TypeError::new(span, ErrorCode::NotAList, format!("expected a list, found `{}`", gl)));
                }
                Ok((Term::Length(Arc::new(tl), span), SType::real(gl.eff().scale(inf()))))
            }
            GKind::IndexOf(l, p) => {
                let (tl, gl) = self.synth(l)?;
                let Some(elem) = gl.elem() else {
                    return Err(TypeError::new(span, ErrorCode::NotAList, format!("expected a list, found `{}`", gl)));
                };
                let (tp, gp) = self.synth(p)?;
                let (Some(dom), Some(cod)) = (gp.dom(), gp.cod()) else {
                    return Err(TypeError::new(
                        p.span,
                        ErrorCode::NotAFunction,
                        format!("indexOf expects a predicate, found `{}`", gp),
                    ));
                };
                if !matches!(cod.ty(), Some(Type::Bool)) {
                    return Err(TypeError::new(
                        p.span,
                        ErrorCode::OperatorMismatch,
                        format!("indexOf expects a Boolean predicate, found `{}`", gp),
                    ));
                }
                if interior(&elem, &dom).is_none() {
                    return Err(mismatch(&elem, &dom, p.span));
                }
                let eff = gl.eff().add(&gp.eff()).add(&cod.eff()).scale(inf());
                let g = SType::real(eff);
                Ok((Term::IndexOf(Arc::new(tl), Arc::new(tp), g.clone(), span), g))
            }
            GKind::Laplace(v, s, eps) => {
                let (tv, gv) = self.synth(v)?;
                require_real(&gv, v.span)?;
                let scale = match &s.kind {
                    GKind::Const(Const::Real(x)) if *x > 0.0 && x.is_finite() => Sens::new(*x).expect("positive"),
                    _ => {
                        return Err(TypeError::new(
                            s.span,
                            ErrorCode::LaplaceScale,
                            "the sensitivity argument of laplace must be a positive numeric literal",
                        ))
                    }
                };
                let (te, ge) = self.synth(eps)?;
                require_real(&ge, eps.span)?;
                Ok((Term::Laplace(Arc::new(tv), scale, Arc::new(te), span), SType::real(SensEnv::empty())))
            }
        }
    }

    /// `t a` where `t : g`. `cached` is an already elaborated argument.
    fn apply(
        &mut self,
        tf: Term,
        gf: SType,
        a: &GExpr,
        cached: Option<(Term, SType)>,
        span: Span,
    ) -> TResult<(Term, SType)> {
        let (Some(dom), Some(cod)) = (gf.dom(), gf.cod()) else {
            return Err(TypeError::new(span, ErrorCode::NotAFunction, format!("expected a function, found `{}`", gf)));
        };
        let (ta, ga) = match cached {
            Some(c) => c,
            None => self.check(a, &dom)?,
        };
        let arg = ascribe(ta, &ga, &dom, a.span)?;
        Ok((Term::App(Arc::new(tf), Arc::new(arg), span), cod))
    }

    fn instantiate(&mut self, t: Term, g: SType, s: SensEnv, span: Span) -> TResult<(Term, SType)> {
        match g.inst(&s) {
            Some(gi) => Ok((Term::ResApp(Arc::new(t), s, span), gi)),
            None => Err(TypeError::new(
                span,
                ErrorCode::NotAResourceAbstraction,
                format!("expected a resource abstraction, found `{}`", g),
            )),
        }
    }
}

fn inf() -> GradualSens {
    GradualSens::exact(Sens::INF)
}

fn require_real(g: &SType, span: Span) -> TResult<()> {
    if matches!(g.ty(), Some(Type::Real)) {
        Ok(())
    } else {
        Err(TypeError::new(span, ErrorCode::OperatorMismatch, format!("expected a Number, found `{}`", g))
            .types(&SType::real(SensEnv::empty()), g))
    }
}

fn is_fix_body(e: &GExpr) -> bool {
    match &e.kind {
        GKind::Lam(..) | GKind::ResLam(..) => true,
        GKind::Ascr(inner, _) => is_fix_body(inner),
        _ => false,
    }
}

fn join(g1: &SType, g2: &SType, span: Span) -> TResult<SType> {
    stype_join(g1, g2).ok_or_else(|| {
        TypeError::new(span, ErrorCode::NoJoin, format!("branch types `{}` and `{}` have no join", g1, g2))
            .types(g1, g2)
    })
}

/// `I(from, to) t :: to`, or a type error naming the refuted judgment.
pub fn ascribe(t: Term, from: &SType, to: &SType, span: Span) -> TResult<Term> {
    match interior(from, to) {
        Some(ev) => Ok(Term::Ascr(ev, Arc::new(t), to.clone(), span)),
        None => Err(mismatch(from, to, span)),
    }
}

fn mismatch(found: &SType, expected: &SType, span: Span) -> TypeError {
    if !same_shape(found, expected) {
        return TypeError::new(
            span,
            ErrorCode::ConstructorMismatch,
            format!("type mismatch: expected `{}`, found `{}`", expected, found),
        )
        .types(expected, found);
    }
    let why = refutation(found, expected, Polarity::Pos)
        .map(|s| format!(": {}", s))
        .unwrap_or_default();
    TypeError::new(
        span,
        ErrorCode::PlausibilityRefuted,
        format!("`{}` is not consistently a subtype of `{}`{}", found, expected, why),
    )
    .types(expected, found)
}

fn widen(g: &SType) -> SType {
    let SType::Eff(t, e) = g else { return g.clone() };
    let eff = SensEnv::from_entries(e.resources().map(|r| (r.clone(), GradualSens::UNKNOWN)));
    let ty = match &**t {
        Type::Real | Type::Bool | Type::Unit => (**t).clone(),
        Type::Arrow(a, b) => Type::Arrow(widen(a), widen(b)),
        Type::Prod(a, b) => Type::Prod(widen(a), widen(b)),
        Type::Sum(a, b) => Type::Sum(widen(a), widen(b)),
        Type::List(a) => Type::List(widen(a)),
        Type::Forall(r, b) => Type::Forall(r.clone(), widen(b)),
        Type::Rec(a, b) => Type::Rec(a.clone(), widen(b)),
    };
    SType::new(ty, eff)
}

/// Do the two types agree once every sensitivity is made unknown?
fn same_shape(g1: &SType, g2: &SType) -> bool {
    let (w1, w2) = (widen(g1), widen(g2));
    interior(&w1, &w2).is_some() && interior(&w2, &w1).is_some()
}

/// The first sensitivity judgment `s1 ≲ s2` that fails, read left to right.
fn refutation(g1: &SType, g2: &SType, pol: Polarity) -> Option<String> {
    let (SType::Eff(t1, e1), SType::Eff(t2, e2)) = (g1, g2) else { return None };
    let (lo, hi) = match pol {
        Polarity::Pos => (e1, e2),
        Polarity::Neg => (e2, e1),
    };
    let keys: BTreeSet<&ResourceVar> = lo.resources().chain(hi.resources()).collect();
    for r in keys {
        let (a, b) = (lo.get(r), hi.get(r));
        if !a.cleq(b) {
            return Some(format!("sensitivity {} on `{}` is not below {}", a, r, b));
        }
    }
    match (&**t1, &**t2) {
        (Type::Arrow(d1, c1), Type::Arrow(d2, c2)) => {
            refutation(d1, d2, pol.flip()).or_else(|| refutation(c1, c2, pol))
        }
        (Type::Prod(a1, b1), Type::Prod(a2, b2)) | (Type::Sum(a1, b1), Type::Sum(a2, b2)) => {
            refutation(a1, a2, pol).or_else(|| refutation(b1, b2, pol))
        }
        (Type::List(a1), Type::List(a2)) => refutation(a1, a2, pol),
        (Type::Forall(r1, b1), Type::Forall(r2, b2)) => refutation(b1, &b2.rename_res(r2, r1), pol),
        (Type::Rec(a1, b1), Type::Rec(a2, b2)) => {
            refutation(b1, &b2.subst_rec(a2, &SType::Var(a1.clone())), pol)
        }
        _ => None,
    }
}

/// Folds top-level items into one closed expression: bindings nest as `let`,
/// intermediate expressions are sequenced, and the last expression (or unit)
/// is the result.
pub fn close_program(items: &[TopItem]) -> GExpr {
    let unit = GExpr { kind: GKind::Const(Const::Unit), span: Span::default() };
    let mut body = match items.last() {
        Some(TopItem::Expr(e)) => e.clone(),
        _ => unit,
    };
    let n = if matches!(items.last(), Some(TopItem::Expr(_))) { items.len() - 1 } else { items.len() };
    for it in items[..n].iter().rev() {
        let span = body.span;
        body = match it {
            TopItem::Let { name, res: false, ty, value, .. } => GExpr {
                kind: GKind::Let { name: name.clone(), ty: ty.clone(), value: Box::new(value.clone()), body: Box::new(body) },
                span,
            },
            TopItem::Let { name, res: true, ty, value, span: s } => {
                let value = match ty {
                    Some(t) => GExpr { kind: GKind::Ascr(Box::new(value.clone()), t.clone()), span: *s },
                    None => value.clone(),
                };
                GExpr { kind: GKind::LetRes { name: name.clone(), value: Box::new(value), body: Box::new(body) }, span }
            }
            TopItem::Expr(e) => GExpr {
                kind: GKind::Let { name: "_".into(), ty: None, value: Box::new(e.clone()), body: Box::new(body) },
                span,
            },
        };
    }
    body
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::desugar::desugar_program;
    use crate::syntax::parse_program;

    fn check_program(src: &str) -> TResult<SType> {
        let items = desugar_program(&parse_program(src).unwrap()).unwrap();
        TypeEnv::new().typecheck(&close_program(&items))
    }

    fn r(name: &str) -> ResourceVar {
        ResourceVar::named(name)
    }

    #[test]
    fn well_formedness() {
        let g = SType::real(SensEnv::single(r("r"), GradualSens::from_f64(2.0, 2.0).unwrap()));
        assert!(well_formed(&[r("r")], &g));
        assert!(!well_formed(&[], &SType::real(SensEnv::unit(r("r")))));
        let q = ResourceVar::fresh("q");
        let body = SType::real(SensEnv::unit(r("r")).add(&SensEnv::unit(q.clone())));
        assert!(well_formed(&[r("r")], &SType::pure(Type::Forall(q, body))));
    }

    #[test]
    fn constant_gets_self_interior() {
        let (t, g) = TypeEnv::new()
            .elaborate(&GExpr { kind: GKind::Const(Const::Real(1.0)), span: Span::default() })
            .unwrap();
        assert_eq!(g, SType::real(SensEnv::empty()));
        assert_eq!(t, Term::Const(Evidence::refl(&g), Const::Real(1.0), g.clone()));
    }

    #[test]
    fn scale_typechecks_at_unknown() {
        let g = check_program(
            "def scale(n: Number, res v: Number): Number[?v] = if (n == 0) then 0 else v + scale(n - 1, v); scale",
        )
        .unwrap();
        assert_eq!(g.to_string(), "forall v. Number -> Number[v] -> Number[?v]");
    }

    #[test]
    fn narrowing_through_unknown_is_well_typed() {
        let mut env = TypeEnv::new();
        env.bind_resource("r", r("r"));
        env.bind_var("x", SType::real(SensEnv::single(r("r"), GradualSens::from_f64(2.0, 2.0).unwrap())));
        let e = crate::syntax::desugar::Desugarer::new()
            .expr(&crate::syntax::parse_expr("(x :: Number[?r]) :: Number[1r]").unwrap())
            .unwrap();
        assert_eq!(env.typecheck(&e).unwrap().to_string(), "Number[r]");
        let closed = check_program("let res r = 0; let x: Number[2r] = r + r; (x :: Number[?r]) :: Number[1r]");
        assert_eq!(closed.unwrap().to_string(), "Number");
    }

    #[test]
    fn implausible_application_is_rejected() {
        let e = check_program(
            "let res r = 0; let x: Number[[1,3]r] = r :: Number[?r]; def f(y: Number[0r]): Unit = (); f(x)",
        )
        .unwrap_err();
        assert_eq!(e.code, ErrorCode::PlausibilityRefuted);
        assert!(e.message.contains("[1,3]"), "{}", e.message);
    }

    #[test]
    fn unbound_variable() {
        assert_eq!(check_program("y + 1").unwrap_err().code, ErrorCode::UnboundVariable);
        assert_eq!(check_program("1 :: Number[q]").unwrap_err().code, ErrorCode::UnboundResource);
    }

    #[test]
    fn constructor_mismatch_is_distinguished() {
        assert_eq!(check_program("true :: Number").unwrap_err().code, ErrorCode::ConstructorMismatch);
    }
}
