//! The evidence-carrying core language produced by elaboration.
//!
//! Every introduction form carries the evidence it is ascribed with. Binders
//! are [`Var`]s with unique ids, so substitution never needs renaming of term
//! variables.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::ops::{Const, PrimOp};
use crate::sens::{ResourceVar, Sens, SensEnv};
use crate::syntax::Span;
use crate::types::{Evidence, SType};

static NEXT_VAR_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Var {
    name: Arc<str>,
    id: u64,
}

impl Var {
    pub fn fresh(name: &str) -> Var {
        Var { name: Arc::from(name), id: NEXT_VAR_ID.fetch_add(1, Ordering::Relaxed) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn id(&self) -> u64 {
        self.id
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.name, self.id)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// A conditional's branch types and their join; runtime branch evidence is
/// built from these.
#[derive(Clone, PartialEq, Debug)]
pub struct Branches {
    pub left: SType,
    pub right: SType,
    pub join: SType,
}

#[derive(Clone, PartialEq, Debug)]
pub enum Term {
    Const(Evidence, Const, SType),
    Lam(Evidence, Var, SType, Arc<Term>, SType),
    ResLam(Evidence, ResourceVar, Arc<Term>, SType),
    Pair(Evidence, Arc<Term>, Arc<Term>, SType),
    Inl(Evidence, Arc<Term>, SType),
    Inr(Evidence, Arc<Term>, SType),
    Fold(Evidence, Arc<Term>, SType),
    List(Evidence, Vec<Arc<Term>>, SType),
    Var(Var),
    Op(PrimOp, Vec<Arc<Term>>, Span),
    App(Arc<Term>, Arc<Term>, Span),
    ResApp(Arc<Term>, SensEnv, Span),
    Ascr(Evidence, Arc<Term>, SType, Span),
    Fst(Arc<Term>, Span),
    Snd(Arc<Term>, Span),
    Case { scrut: Arc<Term>, left: (Var, Arc<Term>), right: (Var, Arc<Term>), tys: Branches, span: Span },
    Unfold(Arc<Term>, Span),
    Fix(Var, SType, Arc<Term>),
    If { cond: Arc<Term>, then: Arc<Term>, els: Arc<Term>, tys: Branches, span: Span },
    /// Both branches are already ascribed to the result type.
    Try(Arc<Term>, Arc<Term>, SType),
    Get(Arc<Term>, Arc<Term>, Span),
    Length(Arc<Term>, Span),
    IndexOf(Arc<Term>, Arc<Term>, SType, Span),
    Laplace(Arc<Term>, Sens, Arc<Term>, Span),
}

impl Term {
    /// Syntactic values of the substitution-based semantics.
    pub fn is_value(&self) -> bool {
        match self {
            Term::Const(..) | Term::Lam(..) => true,
            Term::ResLam(_, _, b, _) | Term::Inl(_, b, _) | Term::Inr(_, b, _) | Term::Fold(_, b, _) => b.is_value(),
            Term::Pair(_, a, b, _) => a.is_value() && b.is_value(),
            Term::List(_, xs, _) => xs.iter().all(|x| x.is_value()),
            _ => false,
        }
    }

    /// Evidence and type of a value form.
    pub fn value_parts(&self) -> Option<(&Evidence, &SType)> {
        match self {
            Term::Const(e, _, g)
            | Term::Lam(e, _, _, _, g)
            | Term::ResLam(e, _, _, g)
            | Term::Pair(e, _, _, g)
            | Term::Inl(e, _, g)
            | Term::Inr(e, _, g)
            | Term::Fold(e, _, g)
            | Term::List(e, _, g) => Some((e, g)),
            _ => None,
        }
    }

    pub fn span(&self) -> Span {
        match self {
            Term::Op(_, _, s)
            | Term::App(_, _, s)
            | Term::ResApp(_, _, s)
            | Term::Ascr(_, _, _, s)
            | Term::Fst(_, s)
            | Term::Snd(_, s)
            | Term::Unfold(_, s)
            | Term::Get(_, _, s)
            | Term::Length(_, s)
            | Term::IndexOf(_, _, _, s)
            | Term::Laplace(_, _, _, s)
            | Term::Case { span: s, .. }
            | Term::If { span: s, .. } => *s,
            _ => Span::default(),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + match self {
            Term::Const(..) | Term::Var(_) => 0,
            Term::Lam(_, _, _, b, _)
            | Term::ResLam(_, _, b, _)
            | Term::Inl(_, b, _)
            | Term::Inr(_, b, _)
            | Term::Fold(_, b, _)
            | Term::ResApp(b, _, _)
            | Term::Ascr(_, b, _, _)
            | Term::Fst(b, _)
            | Term::Snd(b, _)
            | Term::Unfold(b, _)
            | Term::Fix(_, _, b)
            | Term::Length(b, _) => b.size(),
            Term::Pair(_, a, b, _)
            | Term::App(a, b, _)
            | Term::Try(a, b, _)
            | Term::Get(a, b, _)
            | Term::IndexOf(a, b, _, _)
            | Term::Laplace(a, _, b, _) => a.size() + b.size(),
            Term::List(_, xs, _) | Term::Op(_, xs, _) => xs.iter().map(|x| x.size()).sum(),
            Term::Case { scrut, left, right, .. } => scrut.size() + left.1.size() + right.1.size(),
            Term::If { cond, then, els, .. } => cond.size() + then.size() + els.size(),
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, xs: &[Arc<Term>]) -> fmt::Result {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{}", x)?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(e, c, g) => write!(f, "{} {} :: {}", e, c, g),
            Term::Lam(e, x, t, b, g) => write!(f, "{} (fn ({}: {}) => {}) :: {}", e, x, t, b, g),
            Term::ResLam(e, r, b, g) => write!(f, "{} (/\\{}. {}) :: {}", e, r, b, g),
            Term::Pair(e, a, b, g) => write!(f, "{} ({}, {}) :: {}", e, a, b, g),
            Term::Inl(e, a, g) => write!(f, "{} inl({}) :: {}", e, a, g),
            Term::Inr(e, a, g) => write!(f, "{} inr({}) :: {}", e, a, g),
            Term::Fold(e, a, g) => write!(f, "{} fold({}) :: {}", e, a, g),
            Term::List(e, xs, g) => {
                write!(f, "{} List(", e)?;
                write_list(f, xs)?;
                write!(f, ") :: {}", g)
            }
            Term::Var(x) => write!(f, "{}", x),
            Term::Op(op, xs, _) if xs.len() == 2 => write!(f, "({} {} {})", xs[0], op.symbol(), xs[1]),
            Term::Op(op, xs, _) => write!(f, "{}({})", op.symbol(), xs[0]),
            Term::App(a, b, _) => write!(f, "({})({})", a, b),
            Term::ResApp(a, s, _) => write!(f, "({})[{}]", a, s),
            Term::Ascr(e, t, g, _) => write!(f, "{} ({}) :: {}", e, t, g),
            Term::Fst(a, _) => write!(f, "fst({})", a),
            Term::Snd(a, _) => write!(f, "snd({})", a),
            Term::Case { scrut, left, right, .. } => {
                write!(f, "case {} of {{ inl {} => {} | inr {} => {} }}", scrut, left.0, left.1, right.0, right.1)
            }
            Term::Unfold(a, _) => write!(f, "unfold({})", a),
            Term::Fix(x, g, b) => write!(f, "fix ({}: {}) => {}", x, g, b),
            Term::If { cond, then, els, .. } => write!(f, "if {} then {} else {}", cond, then, els),
            Term::Try(a, b, _) => write!(f, "try {{ {} }} catch {{ {} }}", a, b),
            Term::Get(a, b, _) => write!(f, "({}).get({})", a, b),
            Term::Length(a, _) => write!(f, "({}).length()", a),
            Term::IndexOf(a, b, _, _) => write!(f, "({}).indexOf({})", a, b),
            Term::Laplace(a, s, b, _) => write!(f, "laplace({}, {}, {})", a, s, b),
        }
    }
}
