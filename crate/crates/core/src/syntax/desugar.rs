//! Desugaring from the surface tree to GS expressions.
//!
//! `def` becomes a (possibly recursive) let-bound chain of resource and term
//! abstractions, `res` parameters become resource binders, template
//! definitions are specialized per use, and calls to definitions with `res`
//! parameters are marked for automatic instantiation.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::ast::*;
use super::pretty::type_to_string;
use crate::ops::{Const, PrimOp};
use crate::sens::{GradualSens, Sens};

#[derive(Clone, PartialEq, Debug)]
pub struct GExpr {
    pub kind: GKind,
    pub span: Span,
}

#[derive(Clone, PartialEq, Debug)]
pub enum GKind {
    Const(Const),
    Var(String),
    Op(PrimOp, Vec<GExpr>),
    Lam(String, TyExpr, Box<GExpr>),
    App(Box<GExpr>, Box<GExpr>),
    ResLam(String, Box<GExpr>),
    ResApp(Box<GExpr>, EffExpr),
    /// Call of a definition with `res` parameters. The callee is applied to
    /// `explicit` first, then to the top-level effect of each argument listed
    /// in `auto`, then to `args`.
    AutoCall { callee: Box<GExpr>, explicit: Vec<EffExpr>, auto: Vec<usize>, args: Vec<GExpr> },
    Ascr(Box<GExpr>, TyExpr),
    Pair(Box<GExpr>, Box<GExpr>),
    Fst(Box<GExpr>),
    Snd(Box<GExpr>),
    Inl(TyExpr, Box<GExpr>),
    Inr(TyExpr, Box<GExpr>),
    Case { scrut: Box<GExpr>, left: (String, Box<GExpr>), right: (String, Box<GExpr>) },
    Fold(TyExpr, Box<GExpr>),
    Unfold(Box<GExpr>),
    Fix(String, TyExpr, Box<GExpr>),
    If(Box<GExpr>, Box<GExpr>, Box<GExpr>),
    Try(Box<GExpr>, Box<GExpr>),
    Let { name: String, ty: Option<TyExpr>, value: Box<GExpr>, body: Box<GExpr> },
    LetRes { name: String, value: Box<GExpr>, body: Box<GExpr> },
    List(Option<TyExpr>, Vec<GExpr>),
    Get(Box<GExpr>, Box<GExpr>),
    Length(Box<GExpr>),
    IndexOf(Box<GExpr>, Box<GExpr>),
    Laplace(Box<GExpr>, Box<GExpr>, Box<GExpr>),
}

impl GExpr {
    fn new(kind: GKind, span: Span) -> GExpr {
        GExpr { kind, span }
    }
}

/// A desugared top-level item.
#[derive(Clone, PartialEq, Debug)]
pub enum TopItem {
    Let { name: String, res: bool, ty: Option<TyExpr>, value: GExpr, span: Span },
    Expr(GExpr),
}

#[derive(Clone, PartialEq, Debug)]
pub struct DesugarError {
    pub span: Span,
    pub message: String,
}

impl fmt::Display for DesugarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

type DResult<T> = Result<T, DesugarError>;

fn err<T>(span: Span, message: impl Into<String>) -> DResult<T> {
    Err(DesugarError { span, message: message.into() })
}

/// Shape of a definition that matters at call sites.
#[derive(Clone, Debug)]
struct DefInfo {
    rparams: usize,
    auto: Vec<usize>,
}

/// Desugaring state. Persistent across calls so a REPL can feed items one
/// at a time.
#[derive(Default)]
pub struct Desugarer {
    scope: Vec<(String, Option<DefInfo>)>,
    templates: HashMap<String, Def>,
    specialized: BTreeSet<String>,
    /// Specializations produced while desugaring the current item; emitted
    /// before it.
    pending: Vec<TopItem>,
}

pub fn desugar_program(prog: &Program) -> DResult<Vec<TopItem>> {
    Desugarer::default().program(prog)
}

impl Desugarer {
    pub fn new() -> Desugarer {
        Desugarer::default()
    }

    pub fn program(&mut self, prog: &Program) -> DResult<Vec<TopItem>> {
        let mut out = Vec::new();
        for s in &prog.items {
            out.extend(self.item(s)?);
        }
        Ok(out)
    }

    /// Desugars one top-level statement. Template specializations it needs
    /// come first in the result.
    pub fn item(&mut self, s: &Stmt) -> DResult<Vec<TopItem>> {
        let mark = self.scope.len();
        let result = self.item_inner(s);
        if result.is_err() {
            self.scope.truncate(mark);
        }
        let item = result?;
        let mut out = std::mem::take(&mut self.pending);
        out.extend(item);
        Ok(out)
    }

    fn item_inner(&mut self, s: &Stmt) -> DResult<Option<TopItem>> {
        match s {
            Stmt::Let { name, res, ty, value, span } => {
                let value = self.expr(value)?;
                self.scope.push((name.clone(), None));
                Ok(Some(TopItem::Let { name: name.clone(), res: *res, ty: ty.clone(), value, span: *span }))
            }
            Stmt::Def(d) if !d.tparams.is_empty() => {
                self.templates.insert(d.name.clone(), d.clone());
                Ok(None)
            }
            Stmt::Def(d) => {
                let (value, info) = self.def(d)?;
                self.scope.push((d.name.clone(), Some(info)));
                Ok(Some(TopItem::Let { name: d.name.clone(), res: false, ty: None, value, span: d.span }))
            }
            Stmt::Expr(e) => Ok(Some(TopItem::Expr(self.expr(e)?))),
        }
    }

    fn lookup(&self, name: &str) -> Option<&DefInfo> {
        self.scope.iter().rev().find(|(n, _)| n == name).and_then(|(_, i)| i.as_ref())
    }

    fn with_bound<T>(&mut self, names: &[&str], f: impl FnOnce(&mut Self) -> DResult<T>) -> DResult<T> {
        let mark = self.scope.len();
        for n in names {
            self.scope.push((n.to_string(), None));
        }
        let r = f(self);
        self.scope.truncate(mark);
        r
    }

    fn def(&mut self, d: &Def) -> DResult<(GExpr, DefInfo)> {
        let info = DefInfo {
            rparams: d.rparams.len(),
            auto: d.params.iter().enumerate().filter(|(_, p)| p.res).map(|(i, _)| i).collect(),
        };
        let param_names: Vec<&str> = d.params.iter().map(|p| p.name.as_str()).collect();
        let recursive = {
            let mut bound: Vec<String> = param_names.iter().map(|s| s.to_string()).collect();
            let mut free = BTreeSet::new();
            expr_free_vars(&d.body, &mut bound, &mut free);
            free.contains(&d.name)
        };
        let mark = self.scope.len();
        if recursive {
            self.scope.push((d.name.clone(), Some(info.clone())));
        }
        let body = self.with_bound(&param_names, |this| this.expr(&d.body));
        self.scope.truncate(mark);
        let mut body = body?;
        if let Some(ret) = &d.ret {
            body = GExpr::new(GKind::Ascr(Box::new(body), ret.clone()), d.body.span);
        }
        let value = abstract_params(&d.rparams, &d.params, body, d.span);
        if !recursive {
            return Ok((value, info));
        }
        let Some(ret) = &d.ret else {
            return err(d.span, format!("recursive definition `{}` needs a return type", d.name));
        };
        let fix_ty = def_type(&d.rparams, &d.params, ret, d.span);
        Ok((GExpr::new(GKind::Fix(d.name.clone(), fix_ty, Box::new(value)), d.span), info))
    }

    fn specialize(&mut self, name: &str, tys: &[TyExpr], span: Span) -> DResult<String> {
        let Some(t) = self.templates.get(name).cloned() else {
            return err(span, format!("unknown template `{}`", name));
        };
        if t.tparams.len() != tys.len() {
            return err(
                span,
                format!("template `{}` takes {} type argument(s), found {}", name, t.tparams.len(), tys.len()),
            );
        }
        let mangled =
            format!("{}<{}>", name, tys.iter().map(type_to_string).collect::<Vec<_>>().join(", "));
        if self.specialized.contains(&mangled) {
            return Ok(mangled);
        }
        let map: Vec<(String, TyExpr)> = t.tparams.iter().cloned().zip(tys.iter().cloned()).collect();
        let mut d = Def {
            name: mangled.clone(),
            tparams: Vec::new(),
            rparams: t.rparams.clone(),
            params: t
                .params
                .iter()
                .map(|p| Param { ty: subst_ty(&p.ty, &map), ..p.clone() })
                .collect(),
            ret: t.ret.as_ref().map(|r| subst_ty(r, &map)),
            body: subst_expr(&t.body, &map),
            span: t.span,
        };
        // Recursive calls inside a template refer to the same specialization.
        rename_var(&mut d.body, name, &mangled);
        self.specialized.insert(mangled.clone());
        let (value, info) = match self.def(&d) {
            Ok(v) => v,
            Err(e) => {
                self.specialized.remove(&mangled);
                return Err(e);
            }
        };
        self.pending.push(TopItem::Let { name: mangled.clone(), res: false, ty: None, value, span: d.span });
        // Specializations are global: keep them visible after local scopes close.
        self.scope.insert(0, (mangled.clone(), Some(info)));
        Ok(mangled)
    }

    fn exprs(&mut self, es: &[Expr]) -> DResult<Vec<GExpr>> {
        es.iter().map(|e| self.expr(e)).collect()
    }

    fn bx(&mut self, e: &Expr) -> DResult<Box<GExpr>> {
        Ok(Box::new(self.expr(e)?))
    }

    pub fn expr(&mut self, e: &Expr) -> DResult<GExpr> {
        let span = e.span;
        let kind = match &e.kind {
            ExprKind::Num(v) => GKind::Const(Const::Real(*v)),
            ExprKind::Bool(b) => GKind::Const(Const::Bool(*b)),
            ExprKind::Unit => GKind::Const(Const::Unit),
            ExprKind::Var(x) => GKind::Var(x.clone()),
            ExprKind::Template(name, tys) => GKind::Var(self.specialize(name, tys, span)?),
            ExprKind::Op(op, args) => GKind::Op(*op, self.exprs(args)?),
            ExprKind::Lam(params, body) => {
                let names: Vec<&str> = params.iter().map(|p| p.name.as_str()).collect();
                let body = self.with_bound(&names, |this| this.expr(body))?;
                return Ok(abstract_params(&[], params, body, span));
            }
            ExprKind::Call(callee, args) => return self.call(callee, args, span),
            ExprKind::ResLam(r, body) => GKind::ResLam(r.clone(), self.bx(body)?),
            ExprKind::ResApp(f, eff) => GKind::ResApp(self.bx(f)?, eff.clone()),
            ExprKind::Ascr(inner, t) => GKind::Ascr(self.bx(inner)?, t.clone()),
            ExprKind::Pair(a, b) => GKind::Pair(self.bx(a)?, self.bx(b)?),
            ExprKind::Fst(a) => GKind::Fst(self.bx(a)?),
            ExprKind::Snd(a) => GKind::Snd(self.bx(a)?),
            ExprKind::Inl(t, a) => GKind::Inl(t.clone(), self.bx(a)?),
            ExprKind::Inr(t, a) => GKind::Inr(t.clone(), self.bx(a)?),
            ExprKind::Case { scrut, left, right } => {
                let scrut = self.bx(scrut)?;
                let l = self.with_bound(&[&left.0], |this| this.bx(&left.1))?;
                let r = self.with_bound(&[&right.0], |this| this.bx(&right.1))?;
                GKind::Case { scrut, left: (left.0.clone(), l), right: (right.0.clone(), r) }
            }
            ExprKind::Fold(t, a) => GKind::Fold(t.clone(), self.bx(a)?),
            ExprKind::Unfold(a) => GKind::Unfold(self.bx(a)?),
            ExprKind::Fix(f, t, body) => {
                let body = self.with_bound(&[f], |this| this.bx(body))?;
                GKind::Fix(f.clone(), t.clone(), body)
            }
            ExprKind::If(c, a, b) => GKind::If(self.bx(c)?, self.bx(a)?, self.bx(b)?),
            ExprKind::Try(a, b) => GKind::Try(self.bx(a)?, self.bx(b)?),
            ExprKind::Block(stmts, tail) => {
                let mark = self.scope.len();
                let r = self.block(stmts, tail.as_deref(), span);
                self.scope.truncate(mark);
                return r;
            }
            ExprKind::List(ann, elems) => GKind::List(ann.clone(), self.exprs(elems)?),
            ExprKind::Get(l, i) => GKind::Get(self.bx(l)?, self.bx(i)?),
            ExprKind::Length(l) => GKind::Length(self.bx(l)?),
            ExprKind::IndexOf(l, p) => GKind::IndexOf(self.bx(l)?, self.bx(p)?),
            ExprKind::Laplace(a, b, c) => GKind::Laplace(self.bx(a)?, self.bx(b)?, self.bx(c)?),
        };
        Ok(GExpr::new(kind, span))
    }

    fn call(&mut self, callee: &Expr, args: &[Expr], span: Span) -> DResult<GExpr> {
        // Peel explicit resource applications off a named callee.
        let mut explicit = Vec::new();
        let mut head = callee;
        while let ExprKind::ResApp(f, eff) = &head.kind {
            explicit.push(eff.clone());
            head = f;
        }
        explicit.reverse();
        let name = match &head.kind {
            ExprKind::Var(x) => Some(x.clone()),
            ExprKind::Template(name, tys) => Some(self.specialize(name, tys, head.span)?),
            _ => None,
        };
        let info = name.as_deref().and_then(|n| self.lookup(n)).cloned();
        if let (Some(name), Some(info)) = (name, info) {
            if !info.auto.is_empty() {
                if explicit.len() != info.rparams {
                    return err(
                        span,
                        format!(
                            "`{}` takes {} explicit resource argument(s) before its `res` parameters, found {}",
                            name,
                            info.rparams,
                            explicit.len()
                        ),
                    );
                }
                let args = if args.is_empty() { vec![unit_expr(span)] } else { self.exprs(args)? };
                if info.auto.iter().any(|&i| i >= args.len()) {
                    return err(span, format!("`{}` expects a `res` argument at every marked position", name));
                }
                let callee = Box::new(GExpr::new(GKind::Var(name), head.span));
                return Ok(GExpr::new(GKind::AutoCall { callee, explicit, auto: info.auto, args }, span));
            }
        }
        let mut f = self.expr(callee)?;
        if args.is_empty() {
            return Ok(GExpr::new(GKind::App(Box::new(f), Box::new(unit_expr(span))), span));
        }
        for a in args {
            let a = self.expr(a)?;
            let s = f.span.to(a.span);
            f = GExpr::new(GKind::App(Box::new(f), Box::new(a)), s);
        }
        Ok(f)
    }

    fn block(&mut self, stmts: &[Stmt], tail: Option<&Expr>, span: Span) -> DResult<GExpr> {
        let Some((first, rest)) = stmts.split_first() else {
            return match tail {
                Some(t) => self.expr(t),
                None => Ok(unit_expr(span)),
            };
        };
        match first {
            Stmt::Let { name, res, ty, value, span: s } => {
                let value = self.expr(value)?;
                self.scope.push((name.clone(), None));
                let body = Box::new(self.block(rest, tail, span)?);
                if *res {
                    let value = match ty {
                        Some(t) => GExpr::new(GKind::Ascr(Box::new(value), t.clone()), *s),
                        None => value,
                    };
                    Ok(GExpr::new(GKind::LetRes { name: name.clone(), value: Box::new(value), body }, span))
                } else {
                    Ok(GExpr::new(
                        GKind::Let { name: name.clone(), ty: ty.clone(), value: Box::new(value), body },
                        span,
                    ))
                }
            }
            Stmt::Def(d) if !d.tparams.is_empty() => err(d.span, "template definitions must be at top level"),
            Stmt::Def(d) => {
                let (value, info) = self.def(d)?;
                self.scope.push((d.name.clone(), Some(info)));
                let body = Box::new(self.block(rest, tail, span)?);
                Ok(GExpr::new(GKind::Let { name: d.name.clone(), ty: None, value: Box::new(value), body }, span))
            }
            Stmt::Expr(e) => {
                let value = Box::new(self.expr(e)?);
                self.scope.push(("_".into(), None));
                let body = Box::new(self.block(rest, tail, span)?);
                Ok(GExpr::new(GKind::Let { name: "_".into(), ty: None, value, body }, span))
            }
        }
    }
}

fn unit_expr(span: Span) -> GExpr {
    GExpr::new(GKind::Const(Const::Unit), span)
}

fn unit_ty(span: Span) -> TyExpr {
    TyExpr::new(TyKind::Unit, span)
}

/// Parameter type after `res` desugaring: `T` becomes `T[1x]`.
fn param_type(p: &Param) -> TyExpr {
    let mut t = p.ty.clone();
    if p.res {
        t.eff.push(EffTerm { coef: GradualSens::exact(Sens::ONE), res: p.name.clone(), span: p.span });
    }
    t
}

/// `Λ r̄. Λ x̂̄. λ p̄. body`, with `λ_:Unit` for an empty parameter list.
fn abstract_params(rparams: &[String], params: &[Param], body: GExpr, span: Span) -> GExpr {
    let mut e = body;
    if params.is_empty() {
        e = GExpr::new(GKind::Lam("_".into(), unit_ty(span), Box::new(e)), span);
    }
    for p in params.iter().rev() {
        e = GExpr::new(GKind::Lam(p.name.clone(), param_type(p), Box::new(e)), span);
    }
    for p in params.iter().rev().filter(|p| p.res) {
        e = GExpr::new(GKind::ResLam(p.name.clone(), Box::new(e)), span);
    }
    for r in rparams.iter().rev() {
        e = GExpr::new(GKind::ResLam(r.clone(), Box::new(e)), span);
    }
    e
}

fn def_type(rparams: &[String], params: &[Param], ret: &TyExpr, span: Span) -> TyExpr {
    let arrow = |a: TyExpr, b: TyExpr| TyExpr::new(TyKind::Arrow(Box::new(a), Box::new(b)), span);
    let mut t = ret.clone();
    if params.is_empty() {
        t = arrow(unit_ty(span), t);
    }
    for p in params.iter().rev() {
        t = arrow(param_type(p), t);
    }
    for p in params.iter().rev().filter(|p| p.res) {
        t = TyExpr::new(TyKind::Forall(p.name.clone(), Box::new(t)), span);
    }
    for r in rparams.iter().rev() {
        t = TyExpr::new(TyKind::Forall(r.clone(), Box::new(t)), span);
    }
    t
}

// ---- template substitution ----------------------------------------------------

fn subst_ty(t: &TyExpr, map: &[(String, TyExpr)]) -> TyExpr {
    let sub = |b: &TyExpr| Box::new(subst_ty(b, map));
    let (kind, extra) = match &t.kind {
        TyKind::Named(n) => match map.iter().find(|(k, _)| k == n) {
            Some((_, repl)) => (repl.kind.clone(), repl.eff.clone()),
            None => (t.kind.clone(), Vec::new()),
        },
        TyKind::Arrow(a, b) => (TyKind::Arrow(sub(a), sub(b)), Vec::new()),
        TyKind::Prod(a, b) => (TyKind::Prod(sub(a), sub(b)), Vec::new()),
        TyKind::Sum(a, b) => (TyKind::Sum(sub(a), sub(b)), Vec::new()),
        TyKind::List(a) => (TyKind::List(sub(a)), Vec::new()),
        TyKind::Forall(r, b) => (TyKind::Forall(r.clone(), sub(b)), Vec::new()),
        TyKind::Rec(a, b) => {
            let inner: Vec<_> = map.iter().filter(|(k, _)| k != a).cloned().collect();
            (TyKind::Rec(a.clone(), Box::new(subst_ty(b, &inner))), Vec::new())
        }
        other => (other.clone(), Vec::new()),
    };
    let mut eff = extra;
    eff.extend(t.eff.iter().cloned());
    TyExpr { kind, eff, span: t.span }
}

fn subst_params(ps: &[Param], map: &[(String, TyExpr)]) -> Vec<Param> {
    ps.iter().map(|p| Param { ty: subst_ty(&p.ty, map), ..p.clone() }).collect()
}

fn subst_stmt(s: &Stmt, map: &[(String, TyExpr)]) -> Stmt {
    match s {
        Stmt::Let { name, res, ty, value, span } => Stmt::Let {
            name: name.clone(),
            res: *res,
            ty: ty.as_ref().map(|t| subst_ty(t, map)),
            value: subst_expr(value, map),
            span: *span,
        },
        Stmt::Def(d) => Stmt::Def(Def {
            params: subst_params(&d.params, map),
            ret: d.ret.as_ref().map(|t| subst_ty(t, map)),
            body: subst_expr(&d.body, map),
            ..d.clone()
        }),
        Stmt::Expr(e) => Stmt::Expr(subst_expr(e, map)),
    }
}

fn subst_expr(e: &Expr, map: &[(String, TyExpr)]) -> Expr {
    use ExprKind::*;
    let s = |x: &Expr| Box::new(subst_expr(x, map));
    let t = |x: &TyExpr| subst_ty(x, map);
    let kind = match &e.kind {
        Num(_) | Bool(_) | Unit | Var(_) => e.kind.clone(),
        Template(n, tys) => Template(n.clone(), tys.iter().map(t).collect()),
        Op(op, xs) => Op(*op, xs.iter().map(|x| subst_expr(x, map)).collect()),
        Lam(ps, b) => Lam(subst_params(ps, map), s(b)),
        Call(f, xs) => Call(s(f), xs.iter().map(|x| subst_expr(x, map)).collect()),
        ResLam(r, b) => ResLam(r.clone(), s(b)),
        ResApp(f, eff) => ResApp(s(f), eff.clone()),
        Ascr(x, ty) => Ascr(s(x), t(ty)),
        Pair(a, b) => Pair(s(a), s(b)),
        Fst(a) => Fst(s(a)),
        Snd(a) => Snd(s(a)),
        Inl(ty, a) => Inl(t(ty), s(a)),
        Inr(ty, a) => Inr(t(ty), s(a)),
        Case { scrut, left, right } => {
            Case { scrut: s(scrut), left: (left.0.clone(), s(&left.1)), right: (right.0.clone(), s(&right.1)) }
        }
        Fold(ty, a) => Fold(t(ty), s(a)),
        Unfold(a) => Unfold(s(a)),
        Fix(f, ty, b) => Fix(f.clone(), t(ty), s(b)),
        If(a, b, c) => If(s(a), s(b), s(c)),
        Try(a, b) => Try(s(a), s(b)),
        Block(stmts, tail) => Block(stmts.iter().map(|x| subst_stmt(x, map)).collect(), tail.as_ref().map(|x| s(x))),
        List(ann, xs) => List(ann.as_ref().map(t), xs.iter().map(|x| subst_expr(x, map)).collect()),
        Get(a, b) => Get(s(a), s(b)),
        Length(a) => Length(s(a)),
        IndexOf(a, b) => IndexOf(s(a), s(b)),
        Laplace(a, b, c) => Laplace(s(a), s(b), s(c)),
    };
    Expr::new(kind, e.span)
}

fn rename_var(e: &mut Expr, from: &str, to: &str) {
    if let ExprKind::Var(x) = &mut e.kind {
        if x == from {
            *x = to.to_string();
        }
        return;
    }
    for_each_child(e, &mut |c| rename_var(c, from, to));
}

fn for_each_child(e: &mut Expr, f: &mut dyn FnMut(&mut Expr)) {
    use ExprKind::*;
    match &mut e.kind {
        Num(_) | Bool(_) | Unit | Var(_) | Template(..) => {}
        Op(_, xs) | List(_, xs) => xs.iter_mut().for_each(|x| f(x)),
        Call(g, xs) => {
            f(g);
            xs.iter_mut().for_each(|x| f(x));
        }
        Lam(_, b) | ResLam(_, b) | ResApp(b, _) | Ascr(b, _) | Fst(b) | Snd(b) | Inl(_, b) | Inr(_, b) | Fold(_, b)
        | Unfold(b) | Fix(_, _, b) | Length(b) => f(b),
        Pair(a, b) | Try(a, b) | Get(a, b) | IndexOf(a, b) => {
            f(a);
            f(b);
        }
        If(a, b, c) | Laplace(a, b, c) => {
            f(a);
            f(b);
            f(c);
        }
        Case { scrut, left, right } => {
            f(scrut);
            f(&mut left.1);
            f(&mut right.1);
        }
        Block(stmts, tail) => {
            for s in stmts {
                match s {
                    Stmt::Let { value, .. } => f(value),
                    Stmt::Def(d) => f(&mut d.body),
                    Stmt::Expr(x) => f(x),
                }
            }
            if let Some(t) = tail {
                f(t);
            }
        }
    }
}

// ---- free-variable audit --------------------------------------------------------

fn stmt_scope_free(stmts: &[Stmt], tail: Option<&Expr>, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    let mark = bound.len();
    for s in stmts {
        match s {
            Stmt::Let { name, value, .. } => {
                expr_free_vars(value, bound, out);
                bound.push(name.clone());
            }
            Stmt::Def(d) => {
                let m = bound.len();
                bound.push(d.name.clone());
                bound.extend(d.params.iter().map(|p| p.name.clone()));
                expr_free_vars(&d.body, bound, out);
                bound.truncate(m);
                bound.push(d.name.clone());
            }
            Stmt::Expr(e) => expr_free_vars(e, bound, out),
        }
    }
    if let Some(t) = tail {
        expr_free_vars(t, bound, out);
    }
    bound.truncate(mark);
}

/// Free term variables of a surface expression.
pub fn expr_free_vars(e: &Expr, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    use ExprKind::*;
    let under = |names: &[&String], body: &Expr, bound: &mut Vec<String>, out: &mut BTreeSet<String>| {
        let m = bound.len();
        bound.extend(names.iter().map(|s| s.to_string()));
        expr_free_vars(body, bound, out);
        bound.truncate(m);
    };
    match &e.kind {
        Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Template(n, _) => {
            if !bound.contains(n) {
                out.insert(n.clone());
            }
        }
        Lam(ps, b) => under(&ps.iter().map(|p| &p.name).collect::<Vec<_>>(), b, bound, out),
        Fix(f, _, b) => under(&[f], b, bound, out),
        Case { scrut, left, right } => {
            expr_free_vars(scrut, bound, out);
            under(&[&left.0], &left.1, bound, out);
            under(&[&right.0], &right.1, bound, out);
        }
        Block(stmts, tail) => stmt_scope_free(stmts, tail.as_deref(), bound, out),
        _ => {
            let mut e = e.clone();
            for_each_child(&mut e, &mut |c| expr_free_vars(c, bound, out));
        }
    }
}

/// Free term variables of a surface program (template names count as bound
/// by their definitions).
pub fn program_free_vars(prog: &Program) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut bound: Vec<String> = prog
        .items
        .iter()
        .filter_map(|s| match s {
            Stmt::Def(d) if !d.tparams.is_empty() => Some(d.name.clone()),
            _ => None,
        })
        .collect();
    stmt_scope_free(&prog.items, None, &mut bound, &mut out);
    out
}

impl GExpr {
    pub fn free_vars(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        use GKind::*;
        let under = |name: &String, body: &GExpr, bound: &mut Vec<String>, out: &mut BTreeSet<String>| {
            bound.push(name.clone());
            body.free_vars(bound, out);
            bound.pop();
        };
        match &self.kind {
            Const(_) => {}
            Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Op(_, xs) | List(_, xs) => xs.iter().for_each(|x| x.free_vars(bound, out)),
            Lam(x, _, b) | Fix(x, _, b) => under(x, b, bound, out),
            App(a, b) | Pair(a, b) | Try(a, b) | Get(a, b) | IndexOf(a, b) => {
                a.free_vars(bound, out);
                b.free_vars(bound, out);
            }
            ResLam(_, b) | ResApp(b, _) | Ascr(b, _) | Fst(b) | Snd(b) | Inl(_, b) | Inr(_, b) | Fold(_, b)
            | Unfold(b) | Length(b) => b.free_vars(bound, out),
            AutoCall { callee, args, .. } => {
                callee.free_vars(bound, out);
                args.iter().for_each(|x| x.free_vars(bound, out));
            }
            Case { scrut, left, right } => {
                scrut.free_vars(bound, out);
                under(&left.0, &left.1, bound, out);
                under(&right.0, &right.1, bound, out);
            }
            If(a, b, c) | Laplace(a, b, c) => {
                a.free_vars(bound, out);
                b.free_vars(bound, out);
                c.free_vars(bound, out);
            }
            Let { name, value, body, .. } | LetRes { name, value, body } => {
                value.free_vars(bound, out);
                under(name, body, bound, out);
            }
        }
    }
}

/// Free variables of a desugared program, threading top-level bindings.
pub fn items_free_vars(items: &[TopItem]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut bound = Vec::new();
    for it in items {
        match it {
            TopItem::Let { name, value, .. } => {
                value.free_vars(&mut bound, &mut out);
                bound.push(name.clone());
            }
            TopItem::Expr(e) => e.free_vars(&mut bound, &mut out),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parser::parse_program;

    fn desugar(src: &str) -> Vec<TopItem> {
        desugar_program(&parse_program(src).unwrap()).unwrap()
    }

    #[test]
    fn res_parameter_becomes_binder() {
        let items = desugar("def double(res n: Number): Number[2n] = n + n;");
        let TopItem::Let { value, .. } = &items[0] else { panic!() };
        let GKind::ResLam(r, lam) = &value.kind else { panic!("{:?}", value.kind) };
        assert_eq!(r, "n");
        let GKind::Lam(x, ty, body) = &lam.kind else { panic!() };
        assert_eq!(x, "n");
        assert_eq!(type_to_string(ty), "Number[n]");
        let GKind::Ascr(_, ret) = &body.kind else { panic!() };
        assert_eq!(type_to_string(ret), "Number[2n]");
    }

    #[test]
    fn recursive_def_uses_fix_and_auto_instantiation() {
        let items =
            desugar("def scale(n: Number, res v: Number): Number[?v] = if (n == 0) then 0 else v + scale(n - 1, v);");
        let TopItem::Let { value, .. } = &items[0] else { panic!() };
        let GKind::Fix(f, ty, _) = &value.kind else { panic!() };
        assert_eq!(f, "scale");
        assert_eq!(type_to_string(ty), "forall v. Number -> Number[v] -> Number[?v]");
        let items = desugar("def scale(n: Number, res v: Number): Number[?v] = v; scale(2, 3);");
        let TopItem::Expr(call) = &items[1] else { panic!() };
        assert!(matches!(&call.kind, GKind::AutoCall { auto, .. } if auto == &vec![1]));
    }

    #[test]
    fn recursive_def_needs_return_type() {
        let prog = parse_program("def f(x: Number) = f(x);").unwrap();
        assert!(desugar_program(&prog).is_err());
    }

    #[test]
    fn let_is_preserved_for_elaboration() {
        let items = desugar("{ let x = 1; x };");
        let TopItem::Expr(e) = &items[0] else { panic!() };
        assert!(matches!(e.kind, GKind::Let { .. }));
    }

    #[test]
    fn templates_specialize_before_use() {
        let src = "def Id<T>(res x: T): T[?x] = x; Id<Number>(1); Id<Number>(2);";
        let items = desugar(src);
        assert_eq!(items.len(), 3);
        let TopItem::Let { name, .. } = &items[0] else { panic!() };
        assert_eq!(name, "Id<Number>");
    }

    #[test]
    fn audit_introduces_no_free_variables() {
        let src = "let y = 2; def f(a: Number, res b: Number): Number[2b] = a + b + b; f(y, 3); { let z = y; z };";
        let prog = parse_program(src).unwrap();
        let items = desugar_program(&prog).unwrap();
        assert!(items_free_vars(&items).is_subset(&program_free_vars(&prog)));
    }
}
