//! Surface syntax tree.

use crate::ops::PrimOp;
use crate::sens::GradualSens;

/// Byte range into the source text.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Span {
    pub lo: u32,
    pub hi: u32,
}

impl Span {
    pub fn new(lo: usize, hi: usize) -> Span {
        Span { lo: lo as u32, hi: hi as u32 }
    }

    pub fn to(self, other: Span) -> Span {
        Span { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    /// 1-based line and column of the start of the span.
    pub fn line_col(self, src: &str) -> (usize, usize) {
        let lo = (self.lo as usize).min(src.len());
        let before = &src[..lo];
        let line = before.matches('\n').count() + 1;
        let col = before.rfind('\n').map_or(lo, |i| lo - i - 1) + 1;
        (line, col)
    }
}

/// One term `s·r` of a surface effect.
#[derive(Clone, PartialEq, Debug)]
pub struct EffTerm {
    pub coef: GradualSens,
    pub res: String,
    pub span: Span,
}

pub type EffExpr = Vec<EffTerm>;

#[derive(Clone, PartialEq, Debug)]
pub struct TyExpr {
    pub kind: TyKind,
    pub eff: EffExpr,
    pub span: Span,
}

#[derive(Clone, PartialEq, Debug)]
pub enum TyKind {
    Number,
    Boolean,
    Unit,
    /// A recursive type variable or a template parameter.
    Named(String),
    Arrow(Box<TyExpr>, Box<TyExpr>),
    Prod(Box<TyExpr>, Box<TyExpr>),
    Sum(Box<TyExpr>, Box<TyExpr>),
    List(Box<TyExpr>),
    Forall(String, Box<TyExpr>),
    Rec(String, Box<TyExpr>),
}

impl TyExpr {
    pub fn new(kind: TyKind, span: Span) -> TyExpr {
        TyExpr { kind, eff: Vec::new(), span }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct Param {
    pub name: String,
    pub res: bool,
    pub ty: TyExpr,
    pub span: Span,
}

#[derive(Clone, PartialEq, Debug)]
pub struct Def {
    pub name: String,
    pub tparams: Vec<String>,
    pub rparams: Vec<String>,
    pub params: Vec<Param>,
    pub ret: Option<TyExpr>,
    pub body: Expr,
    pub span: Span,
}

#[derive(Clone, PartialEq, Debug)]
pub enum Stmt {
    Let { name: String, res: bool, ty: Option<TyExpr>, value: Expr, span: Span },
    Def(Def),
    Expr(Expr),
}

#[derive(Clone, PartialEq, Debug, Default)]
pub struct Program {
    pub items: Vec<Stmt>,
}

#[derive(Clone, PartialEq, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, PartialEq, Debug)]
pub enum ExprKind {
    Num(f64),
    Bool(bool),
    Unit,
    Var(String),
    /// `Name<T, ...>`, only valid in call position.
    Template(String, Vec<TyExpr>),
    Op(PrimOp, Vec<Expr>),
    Lam(Vec<Param>, Box<Expr>),
    Call(Box<Expr>, Vec<Expr>),
    ResLam(String, Box<Expr>),
    ResApp(Box<Expr>, EffExpr),
    Ascr(Box<Expr>, TyExpr),
    Pair(Box<Expr>, Box<Expr>),
    Fst(Box<Expr>),
    Snd(Box<Expr>),
    /// `inl<B>(e)`: the annotation is the right-hand summand.
    Inl(TyExpr, Box<Expr>),
    /// `inr<A>(e)`: the annotation is the left-hand summand.
    Inr(TyExpr, Box<Expr>),
    Case { scrut: Box<Expr>, left: (String, Box<Expr>), right: (String, Box<Expr>) },
    Fold(TyExpr, Box<Expr>),
    Unfold(Box<Expr>),
    Fix(String, TyExpr, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Try(Box<Expr>, Box<Expr>),
    Block(Vec<Stmt>, Option<Box<Expr>>),
    List(Option<TyExpr>, Vec<Expr>),
    Get(Box<Expr>, Box<Expr>),
    Length(Box<Expr>),
    IndexOf(Box<Expr>, Box<Expr>),
    Laplace(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Expr {
        Expr { kind, span }
    }

    /// Number of nodes in the tree, types excluded.
    pub fn size(&self) -> usize {
        use ExprKind::*;
        1 + match &self.kind {
            Num(_) | Bool(_) | Unit | Var(_) | Template(..) => 0,
            Op(_, xs) | List(_, xs) => xs.iter().map(Expr::size).sum(),
            Call(f, xs) => f.size() + xs.iter().map(Expr::size).sum::<usize>(),
            Lam(_, b) | ResLam(_, b) | ResApp(b, _) | Ascr(b, _) | Fst(b) | Snd(b) | Inl(_, b) | Inr(_, b)
            | Fold(_, b) | Unfold(b) | Fix(_, _, b) | Length(b) => b.size(),
            Pair(a, b) | Try(a, b) | Get(a, b) | IndexOf(a, b) => a.size() + b.size(),
            If(a, b, c) | Laplace(a, b, c) => a.size() + b.size() + c.size(),
            Case { scrut, left, right } => scrut.size() + left.1.size() + right.1.size(),
            Block(stmts, tail) => {
                stmts.iter().map(Stmt::size).sum::<usize>() + tail.as_ref().map_or(0, |t| t.size())
            }
        }
    }
}

impl Stmt {
    pub fn size(&self) -> usize {
        match self {
            Stmt::Let { value, .. } => 1 + value.size(),
            Stmt::Def(d) => 1 + d.body.size(),
            Stmt::Expr(e) => e.size(),
        }
    }
}
