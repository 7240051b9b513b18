//! Surface pretty-printer. Output re-parses to the same tree.

use std::fmt::{self, Write};

use super::ast::*;
use crate::ops::PrimOp;
use crate::sens::{GradualSens, Sens};

struct Num(f64);

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::sens::fmt_number(self.0, f)
    }
}

pub fn effect_to_string(eff: &[EffTerm]) -> String {
    let mut out = String::new();
    for (i, t) in eff.iter().enumerate() {
        if i > 0 {
            out.push_str(" + ");
        }
        write_coef(&mut out, t.coef);
        out.push_str(&t.res);
    }
    out
}

fn write_coef(out: &mut String, g: GradualSens) {
    if g == GradualSens::exact(Sens::ONE) {
    } else if g == GradualSens::exact(Sens::INF) {
        out.push_str("inf ");
    } else if g == GradualSens::UNKNOWN {
        out.push('?');
    } else if g.is_static() {
        let _ = write!(out, "{}", g.lo());
    } else {
        let _ = write!(out, "[{},{}]", g.lo(), g.hi());
    }
}

// Type levels: 0 arrow and binders, 1 sum, 2 product, 3 atom.
fn ty_level(t: &TyExpr) -> u8 {
    if !t.eff.is_empty() {
        return 3;
    }
    match t.kind {
        TyKind::Arrow(..) | TyKind::Forall(..) | TyKind::Rec(..) => 0,
        TyKind::Sum(..) => 1,
        TyKind::Prod(..) => 2,
        _ => 3,
    }
}

pub fn type_to_string(t: &TyExpr) -> String {
    let mut out = String::new();
    write_ty(&mut out, t, 0);
    out
}

fn write_ty(out: &mut String, t: &TyExpr, level: u8) {
    if ty_level(t) < level {
        out.push('(');
        write_ty(out, t, 0);
        out.push(')');
        return;
    }
    let compound = !matches!(
        t.kind,
        TyKind::Number | TyKind::Boolean | TyKind::Unit | TyKind::Named(_) | TyKind::List(_)
    );
    let wrap = compound && !t.eff.is_empty();
    if wrap {
        out.push('(');
    }
    match &t.kind {
        TyKind::Number => out.push_str("Number"),
        TyKind::Boolean => out.push_str("Boolean"),
        TyKind::Unit => out.push_str("Unit"),
        TyKind::Named(n) => out.push_str(n),
        TyKind::List(g) => {
            out.push_str("List<");
            write_ty(out, g, 0);
            out.push('>');
        }
        TyKind::Arrow(a, b) => {
            write_ty(out, a, 1);
            out.push_str(" -> ");
            write_ty(out, b, 0);
        }
        TyKind::Sum(a, b) => {
            write_ty(out, a, 1);
            out.push_str(" + ");
            write_ty(out, b, 2);
        }
        TyKind::Prod(a, b) => {
            write_ty(out, a, 2);
            out.push_str(" * ");
            write_ty(out, b, 3);
        }
        TyKind::Forall(r, b) => {
            let _ = write!(out, "forall {}. ", r);
            write_ty(out, b, 0);
        }
        TyKind::Rec(a, b) => {
            let _ = write!(out, "mu {}. ", a);
            write_ty(out, b, 0);
        }
    }
    if wrap {
        out.push(')');
    }
    if !t.eff.is_empty() {
        out.push('[');
        out.push_str(&effect_to_string(&t.eff));
        out.push(']');
    }
}

// Expression levels.
const OPEN: u8 = 0;
const ASCR: u8 = 1;
const UNARY: u8 = 7;
const POSTFIX: u8 = 8;
const ATOM: u8 = 9;

fn op_level(op: PrimOp) -> u8 {
    op.precedence() + 1
}

fn expr_level(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::If(..) | ExprKind::Lam(..) | ExprKind::ResLam(..) | ExprKind::Fix(..) => OPEN,
        ExprKind::Ascr(..) => ASCR,
        ExprKind::Op(op, _) if op.arity() == 2 => op_level(*op),
        ExprKind::Op(..) => UNARY,
        ExprKind::Num(v) if *v < 0.0 => UNARY,
        ExprKind::Call(..) | ExprKind::ResApp(..) | ExprKind::Get(..) | ExprKind::Length(_) | ExprKind::IndexOf(..) => {
            POSTFIX
        }
        _ => ATOM,
    }
}

pub struct Printer {
    out: String,
    indent: usize,
}

pub fn expr_to_string(e: &Expr) -> String {
    let mut p = Printer { out: String::new(), indent: 0 };
    p.expr(e, OPEN);
    p.out
}

pub fn program_to_string(prog: &Program) -> String {
    let mut p = Printer { out: String::new(), indent: 0 };
    for s in &prog.items {
        p.stmt(s);
        p.out.push('\n');
    }
    p.out
}

impl Printer {
    fn newline(&mut self) {
        self.out.push('\n');
        for _ in 0..self.indent {
            self.out.push_str("  ");
        }
    }

    fn ty(&mut self, t: &TyExpr) {
        write_ty(&mut self.out, t, 0);
    }

    fn params(&mut self, ps: &[Param]) {
        self.out.push('(');
        for (i, p) in ps.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            if p.res {
                self.out.push_str("res ");
            }
            self.out.push_str(&p.name);
            self.out.push_str(": ");
            self.ty(&p.ty);
        }
        self.out.push(')');
    }

    fn args(&mut self, args: &[Expr]) {
        self.out.push('(');
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            self.expr(a, OPEN);
        }
        self.out.push(')');
    }

    fn stmt(&mut self, s: &Stmt) {
        match s {
            Stmt::Let { name, res, ty, value, .. } => {
                self.out.push_str("let ");
                if *res {
                    self.out.push_str("res ");
                }
                self.out.push_str(name);
                if let Some(t) = ty {
                    self.out.push_str(": ");
                    self.ty(t);
                }
                self.out.push_str(" = ");
                self.expr(value, OPEN);
                self.out.push(';');
            }
            Stmt::Def(d) => {
                let _ = write!(self.out, "def {}", d.name);
                if !d.tparams.is_empty() {
                    let _ = write!(self.out, "<{}>", d.tparams.join(", "));
                }
                if !d.rparams.is_empty() {
                    let _ = write!(self.out, "[{}]", d.rparams.join(", "));
                }
                self.params(&d.params);
                if let Some(r) = &d.ret {
                    self.out.push_str(": ");
                    self.ty(r);
                }
                self.out.push_str(" = ");
                self.expr(&d.body, OPEN);
                self.out.push(';');
            }
            Stmt::Expr(e) => {
                self.expr(e, OPEN);
                self.out.push(';');
            }
        }
    }

    fn block(&mut self, stmts: &[Stmt], tail: Option<&Expr>) {
        if stmts.is_empty() && tail.is_none() {
            self.out.push_str("{ }");
            return;
        }
        self.out.push('{');
        self.indent += 1;
        for s in stmts {
            self.newline();
            self.stmt(s);
        }
        if let Some(t) = tail {
            self.newline();
            self.expr(t, OPEN);
        }
        self.indent -= 1;
        self.newline();
        self.out.push('}');
    }

    fn expr(&mut self, e: &Expr, min: u8) {
        if expr_level(e) < min {
            self.out.push('(');
            self.expr(e, OPEN);
            self.out.push(')');
            return;
        }
        match &e.kind {
            ExprKind::Num(v) => {
                let _ = write!(self.out, "{}", Num(*v));
            }
            ExprKind::Bool(b) => {
                let _ = write!(self.out, "{}", b);
            }
            ExprKind::Unit => self.out.push_str("()"),
            ExprKind::Var(x) => self.out.push_str(x),
            ExprKind::Template(name, tys) => {
                self.out.push_str(name);
                self.out.push('<');
                for (i, t) in tys.iter().enumerate() {
                    if i > 0 {
                        self.out.push_str(", ");
                    }
                    self.ty(t);
                }
                self.out.push('>');
            }
            ExprKind::Op(op, args) if op.arity() == 2 => {
                let lvl = op_level(*op);
                self.expr(&args[0], lvl);
                let _ = write!(self.out, " {} ", op.symbol());
                self.expr(&args[1], lvl + 1);
            }
            ExprKind::Op(op, args) => {
                self.out.push_str(op.symbol());
                let mut inner = Printer { out: String::new(), indent: self.indent };
                inner.expr(&args[0], UNARY);
                if inner.out.starts_with('-') {
                    self.out.push(' ');
                }
                self.out.push_str(&inner.out);
            }
            ExprKind::Lam(ps, body) => {
                self.out.push_str("fn ");
                self.params(ps);
                self.out.push_str(" => ");
                self.expr(body, OPEN);
            }
            ExprKind::Call(f, args) => {
                self.expr(f, POSTFIX);
                self.args(args);
            }
            ExprKind::ResLam(r, body) => {
                let _ = write!(self.out, "/\\{}. ", r);
                self.expr(body, OPEN);
            }
            ExprKind::ResApp(f, eff) => {
                self.expr(f, POSTFIX);
                self.out.push('[');
                self.out.push_str(&effect_to_string(eff));
                self.out.push(']');
            }
            ExprKind::Ascr(inner, t) => {
                self.expr(inner, ASCR);
                self.out.push_str(" :: ");
                self.ty(t);
            }
            ExprKind::Pair(a, b) => {
                self.out.push('(');
                self.expr(a, OPEN);
                self.out.push_str(", ");
                self.expr(b, OPEN);
                self.out.push(')');
            }
            ExprKind::Fst(a) | ExprKind::Snd(a) | ExprKind::Unfold(a) => {
                self.out.push_str(match &e.kind {
                    ExprKind::Fst(_) => "fst",
                    ExprKind::Snd(_) => "snd",
                    _ => "unfold",
                });
                self.args(std::slice::from_ref(a.as_ref()));
            }
            ExprKind::Inl(t, a) | ExprKind::Inr(t, a) | ExprKind::Fold(t, a) => {
                self.out.push_str(match &e.kind {
                    ExprKind::Inl(..) => "inl<",
                    ExprKind::Inr(..) => "inr<",
                    _ => "fold<",
                });
                self.ty(t);
                self.out.push('>');
                self.args(std::slice::from_ref(a.as_ref()));
            }
            ExprKind::Case { scrut, left, right } => {
                self.out.push_str("case ");
                self.expr(scrut, OPEN);
                let _ = write!(self.out, " of {{ inl {} => ", left.0);
                self.expr(&left.1, OPEN);
                let _ = write!(self.out, " | inr {} => ", right.0);
                self.expr(&right.1, OPEN);
                self.out.push_str(" }");
            }
            ExprKind::Fix(f, t, body) => {
                let _ = write!(self.out, "fix ({}: ", f);
                self.ty(t);
                self.out.push_str(") => ");
                self.expr(body, OPEN);
            }
            ExprKind::If(c, a, b) => {
                self.out.push_str("if ");
                self.expr(c, OPEN);
                self.out.push_str(" then ");
                self.expr(a, OPEN);
                self.out.push_str(" else ");
                self.expr(b, OPEN);
            }
            ExprKind::Try(a, b) => {
                self.out.push_str("try ");
                self.expr(a, ATOM);
                self.out.push_str(" catch ");
                self.expr(b, ATOM);
            }
            ExprKind::Block(stmts, tail) => self.block(stmts, tail.as_deref()),
            ExprKind::List(ann, elems) => {
                self.out.push_str("List");
                if let Some(t) = ann {
                    self.out.push('<');
                    self.ty(t);
                    self.out.push('>');
                }
                self.args(elems);
            }
            ExprKind::Get(l, i) => {
                self.expr(l, POSTFIX);
                self.out.push_str(".get");
                self.args(std::slice::from_ref(i.as_ref()));
            }
            ExprKind::Length(l) => {
                self.expr(l, POSTFIX);
                self.out.push_str(".length()");
            }
            ExprKind::IndexOf(l, p) => {
                self.expr(l, POSTFIX);
                self.out.push_str(".indexOf");
                self.args(std::slice::from_ref(p.as_ref()));
            }
            ExprKind::Laplace(a, b, c) => {
                self.out.push_str("laplace");
                self.out.push('(');
                self.expr(a, OPEN);
                self.out.push_str(", ");
                self.expr(b, OPEN);
                self.out.push_str(", ");
                self.expr(c, OPEN);
                self.out.push(')');
            }
        }
    }
}
