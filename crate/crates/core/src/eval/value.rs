use std::fmt;
use std::sync::Arc;

use crate::ops::Const;
use crate::sens::{ResourceVar, SensEnv, StaticSensEnv};
use crate::term::{Term, Var};
use crate::types::{interior, Evidence, SType};

/// `ε u :: G`.
#[derive(Clone, Debug)]
pub struct Value {
    pub ev: Evidence,
    pub u: Payload,
    pub ty: SType,
}

#[derive(Clone, Debug)]
pub enum Payload {
    Const(Const),
    Closure(Arc<Closure>),
    /// A reduced resource abstraction `Λr.v`; `r` is a runtime resource.
    ResAbs(ResourceVar, Arc<Value>),
    Pair(Arc<Value>, Arc<Value>),
    Inl(Arc<Value>),
    Inr(Arc<Value>),
    Fold(Arc<Value>),
    List(Arc<Vec<Value>>),
}

#[derive(Debug)]
pub struct Closure {
    pub param: Var,
    pub param_ty: SType,
    pub body: Arc<Term>,
    pub env: Env,
}

#[derive(Clone, Debug)]
pub(crate) enum Binding {
    Val(Value),
    /// `f` bound by a fixpoint: every lookup unfolds `body` again.
    Fix(SType, Arc<Term>),
}

#[derive(Debug)]
pub(crate) struct Node {
    pub var: Var,
    pub binding: Binding,
    pub next: Option<Arc<Node>>,
}

/// Resource bookkeeping for one environment.
///
/// `statics` maps resources bound by `Λ` in the term text to the runtime
/// environments they stand for. `pending` is a substitution of runtime
/// resources not yet pushed into the values stored in `vars`; it is applied
/// on lookup.
#[derive(Clone, Debug, Default)]
pub(crate) struct Rho {
    pub statics: Vec<(ResourceVar, SensEnv)>,
    pub pending: Vec<(ResourceVar, SensEnv)>,
}

impl Rho {
    /// `self` followed by `map`.
    fn then(&self, map: &[(ResourceVar, SensEnv)]) -> Rho {
        let statics = self.statics.iter().map(|(k, s)| (k.clone(), s.subst_many(map))).collect();
        let mut pending: Vec<_> = self.pending.iter().map(|(k, s)| (k.clone(), s.subst_many(map))).collect();
        for (k, s) in map {
            if !pending.iter().any(|(p, _)| p == k) {
                pending.push((k.clone(), s.clone()));
            }
        }
        Rho { statics, pending }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Env {
    pub(crate) vars: Option<Arc<Node>>,
    pub(crate) rho: Arc<Rho>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn bind(&self, var: Var, v: Value) -> Env {
        self.push(var, Binding::Val(v))
    }

    pub(crate) fn push(&self, var: Var, binding: Binding) -> Env {
        Env { vars: Some(Arc::new(Node { var, binding, next: self.vars.clone() })), rho: self.rho.clone() }
    }

    pub(crate) fn bind_static(&self, r: ResourceVar, s: SensEnv) -> Env {
        let mut rho = (*self.rho).clone();
        rho.statics.push((r, s));
        Env { vars: self.vars.clone(), rho: Arc::new(rho) }
    }

    pub(crate) fn lookup(&self, x: &Var) -> Option<&Arc<Node>> {
        let mut cur = self.vars.as_ref();
        while let Some(n) = cur {
            if &n.var == x {
                return Some(n);
            }
            cur = n.next.as_ref();
        }
        None
    }

    /// Applies the static resource map to a type read from the term text.
    pub(crate) fn ty(&self, g: &SType) -> SType {
        g.subst_res_map(&self.rho.statics)
    }

    pub(crate) fn ev(&self, e: &Evidence) -> Evidence {
        e.subst_res_map(&self.rho.statics)
    }

    pub(crate) fn sens(&self, s: &SensEnv) -> SensEnv {
        s.subst_many(&self.rho.statics)
    }

    /// A stored value as seen from this environment.
    pub(crate) fn value(&self, v: &Value) -> Value {
        if self.rho.pending.is_empty() {
            v.clone()
        } else {
            v.subst_res_map(&self.rho.pending)
        }
    }

    fn subst_res_map(&self, map: &[(ResourceVar, SensEnv)]) -> Env {
        Env { vars: self.vars.clone(), rho: Arc::new(self.rho.then(map)) }
    }
}

impl Value {
    pub fn new(ev: Evidence, u: Payload, ty: SType) -> Value {
        Value { ev, u, ty }
    }

    pub fn constant(c: Const) -> Value {
        let g = SType::pure(c.base_type());
        Value { ev: Evidence::refl(&g), u: Payload::Const(c), ty: g }
    }

    /// A constant entering at base type `g`, with evidence
    /// `I(⟨B;lower(Σ)⟩, ⟨B;Σ⟩)`: exactly as sensitive as the least plausible
    /// sensitivity of `g`.
    pub fn input(c: Const, g: &SType) -> Value {
        let lower = g.with_eff(g.eff().lower().embed());
        let ev = interior(&lower, g).expect("a type's lower bound is consistent with it");
        Value { ev, u: Payload::Const(c), ty: g.clone() }
    }

    /// `mon(v)`.
    pub fn mon(&self) -> &Evidence {
        &self.ev
    }

    pub fn as_const(&self) -> Option<Const> {
        match self.u {
            Payload::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self.u {
            Payload::Const(Const::Real(x)) => Some(x),
            _ => None,
        }
    }

    /// `[Σ/r]v` through evidence, annotations and payload.
    pub fn subst_res(&self, r: &ResourceVar, s: &SensEnv) -> Value {
        self.subst_res_map(&[(r.clone(), s.clone())])
    }

    pub fn subst_res_map(&self, map: &[(ResourceVar, SensEnv)]) -> Value {
        let u = match &self.u {
            Payload::Const(c) => Payload::Const(*c),
            Payload::Closure(c) => Payload::Closure(Arc::new(Closure {
                param: c.param.clone(),
                param_ty: c.param_ty.subst_res_map(map),
                body: c.body.clone(),
                env: c.env.subst_res_map(map),
            })),
            Payload::ResAbs(r, v) => {
                let inner: Vec<_> = map.iter().filter(|(k, _)| k != r).cloned().collect();
                Payload::ResAbs(r.clone(), Arc::new(v.subst_res_map(&inner)))
            }
            Payload::Pair(a, b) => Payload::Pair(Arc::new(a.subst_res_map(map)), Arc::new(b.subst_res_map(map))),
            Payload::Inl(a) => Payload::Inl(Arc::new(a.subst_res_map(map))),
            Payload::Inr(a) => Payload::Inr(Arc::new(a.subst_res_map(map))),
            Payload::Fold(a) => Payload::Fold(Arc::new(a.subst_res_map(map))),
            Payload::List(xs) => Payload::List(Arc::new(xs.iter().map(|x| x.subst_res_map(map)).collect())),
        };
        Value { ev: self.ev.subst_res_map(map), u, ty: self.ty.subst_res_map(map) }
    }

    /// Value precision: equal payloads, evidence and annotations pointwise `⊑`.
    /// Closures and resource abstractions are compared by evidence and type only.
    pub fn precise_in(&self, other: &Value) -> bool {
        self.ev.precise_in(&other.ev) && self.ty.precise_in(&other.ty) && payload_rel(&self.u, &other.u, Value::precise_in)
    }

    /// Equality up to renaming of bound resources.
    pub fn equiv(&self, other: &Value) -> bool {
        self.precise_in(other) && other.precise_in(self)
    }
}

fn payload_rel(a: &Payload, b: &Payload, rel: fn(&Value, &Value) -> bool) -> bool {
    match (a, b) {
        (Payload::Const(x), Payload::Const(y)) => x == y,
        (Payload::Closure(_), Payload::Closure(_)) | (Payload::ResAbs(..), Payload::ResAbs(..)) => true,
        (Payload::Pair(a1, b1), Payload::Pair(a2, b2)) => rel(a1, a2) && rel(b1, b2),
        (Payload::Inl(x), Payload::Inl(y)) | (Payload::Inr(x), Payload::Inr(y)) | (Payload::Fold(x), Payload::Fold(y)) => {
            rel(x, y)
        }
        (Payload::List(xs), Payload::List(ys)) => xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| rel(x, y)),
        _ => false,
    }
}

/// `ms(ε)`: the lower bounds of the right-hand effect.
pub fn msens(e: &Evidence) -> StaticSensEnv {
    e.rhs.eff().lower()
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::Const(c) => write!(f, "{}", c),
            Payload::Closure(c) => write!(f, "<fn {}>", c.param),
            Payload::ResAbs(r, _) => write!(f, "<Λ{}>", r),
            Payload::Pair(a, b) => write!(f, "({}, {})", a.u, b.u),
            Payload::Inl(a) => write!(f, "inl({})", a.u),
            Payload::Inr(a) => write!(f, "inr({})", a.u),
            Payload::Fold(a) => write!(f, "fold({})", a.u),
            Payload::List(xs) => {
                write!(f, "List(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", x.u)?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} :: {}", self.ev, self.u, self.ty)
    }
}
