//! A CEK machine for the evidence-carrying core.
//!
//! Closures capture environments; reduced resource abstractions are
//! instantiated by substituting into the stored value, which reaches into
//! closures through [`Env`]'s pending resource map.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ops::{Const, OpError, PrimOp};
use crate::sens::{GradualSens, ResourceVar, Sens, SensEnv};
use crate::syntax::Span;
use crate::term::{Branches, Term, Var};
use crate::types::{ctrans, interior, Evidence, SType};

use super::value::{Binding, Closure, Env, Payload, Value};

pub const DEFAULT_STEP_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub enum RuntimeError {
    /// Consistent transitivity was undefined.
    SensitivityViolation { left: Evidence, right: Evidence, span: Span },
    DivisionByZero { span: Span },
    UserError { message: String, span: Span },
    BudgetExhausted { steps: u64 },
    /// A well-typed program should never get here.
    Stuck { message: String, span: Span },
}

impl RuntimeError {
    pub fn span(&self) -> Option<Span> {
        match self {
            RuntimeError::SensitivityViolation { span, .. }
            | RuntimeError::DivisionByZero { span }
            | RuntimeError::UserError { span, .. }
            | RuntimeError::Stuck { span, .. } => Some(*span),
            RuntimeError::BudgetExhausted { .. } => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RuntimeError::SensitivityViolation { .. } => "SensitivityViolation",
            RuntimeError::DivisionByZero { .. } => "DivisionByZero",
            RuntimeError::UserError { .. } => "UserError",
            RuntimeError::BudgetExhausted { .. } => "BudgetExhausted",
            RuntimeError::Stuck { .. } => "Stuck",
        }
    }

    fn catchable(&self) -> bool {
        matches!(self, RuntimeError::SensitivityViolation { .. } | RuntimeError::UserError { .. })
    }
}

impl fmt::Display for RuntimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuntimeError::SensitivityViolation { left, right, .. } => {
                write!(f, "sensitivity violation: cannot combine evidence {} with {}", left, right)
            }
            RuntimeError::DivisionByZero { .. } => write!(f, "division by zero"),
            RuntimeError::UserError { message, .. } => write!(f, "{}", message),
            RuntimeError::BudgetExhausted { steps } => write!(f, "step budget exhausted after {} steps", steps),
            RuntimeError::Stuck { message, .. } => write!(f, "evaluation stuck: {}", message),
        }
    }
}

impl std::error::Error for RuntimeError {}

/// One reduction, for `--trace`.
#[derive(Clone, Debug)]
pub struct TraceStep {
    pub rule: &'static str,
    pub redex: String,
    pub evidence: String,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<10} {}  ε = {}", self.rule, self.redex, self.evidence)
    }
}

/// Inverse-CDF Laplace sample at location 0 and scale `b`, from `u` in (−½, ½).
pub fn laplace_from_uniform(b: f64, u: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

pub fn sample_laplace<R: Rng + ?Sized>(b: f64, rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random::<f64>() - 0.5;
        if u > -0.5 {
            return laplace_from_uniform(b, u);
        }
    }
}

enum Control {
    Eval(Arc<Term>, Env),
    Ret(Value),
}

enum WrapKind {
    Inl,
    Inr,
    Fold,
}

enum Frame {
    Op { op: PrimOp, args: Vec<Arc<Term>>, done: Vec<Value>, env: Env, span: Span },
    AppArg { arg: Arc<Term>, env: Env, span: Span },
    AppCall { f: Value, span: Span },
    /// Pending `ε □ :: G`; fires r-ascr when a value arrives.
    Ascr { ev: Evidence, ty: SType, span: Span },
    ResApp { s: SensEnv, span: Span },
    ResLamBody { ev: Evidence, r: ResourceVar, ty: SType },
    PairL { b: Arc<Term>, env: Env, ev: Evidence, ty: SType },
    PairR { a: Value, ev: Evidence, ty: SType },
    Fst(Span),
    Snd(Span),
    Unfold(Span),
    Wrap { kind: WrapKind, ev: Evidence, ty: SType },
    Case { left: (Var, Arc<Term>), right: (Var, Arc<Term>), tys: Branches, env: Env, span: Span },
    If { then: Arc<Term>, els: Arc<Term>, tys: Branches, env: Env, span: Span },
    Try { handler: Arc<Term>, env: Env },
    List { rest: Vec<Arc<Term>>, done: Vec<Value>, env: Env, ev: Evidence, ty: SType },
    GetL { i: Arc<Term>, env: Env, span: Span },
    GetR { l: Value, span: Span },
    Length(Span),
    IndexOfL { p: Arc<Term>, env: Env, ty: SType, span: Span },
    IndexOfP { l: Value, ty: SType, span: Span },
    IndexOfIter { l: Value, p: Value, k: usize, ev: Evidence, ty: SType, span: Span },
    LaplaceV { eps: Arc<Term>, env: Env, scale: Sens, span: Span },
    LaplaceE { v: Value, scale: Sens, span: Span },
}

pub struct Machine<'a> {
    stack: Vec<Frame>,
    steps: u64,
    budget: u64,
    rng: ChaCha8Rng,
    trace: Option<Box<dyn FnMut(&TraceStep) + 'a>>,
}

type Step = Result<Control, RuntimeError>;

fn stuck(message: impl Into<String>, span: Span) -> RuntimeError {
    RuntimeError::Stuck { message: message.into(), span }
}

/// `ε u :: G` re-ascribed: `(ε_v ∘ ε) u :: G`.
fn ascribe(v: Value, ev: &Evidence, ty: SType, span: Span) -> Result<Value, RuntimeError> {
    match ctrans(&v.ev, ev) {
        Some(e) => Ok(Value { ev: e, u: v.u, ty }),
        None => Err(RuntimeError::SensitivityViolation { left: v.ev, right: ev.clone(), span }),
    }
}

/// `v :: G`: ascribes a value to `G` through `I(type of v, G)`.
pub fn ascribe_value(v: Value, to: &SType) -> Result<Value, RuntimeError> {
    match interior(&v.ty, to) {
        Some(i) => ascribe(v, &i, to.clone(), Span::default()),
        None => {
            let right = Evidence::refl(to);
            Err(RuntimeError::SensitivityViolation { left: v.ev, right, span: Span::default() })
        }
    }
}

fn inf() -> GradualSens {
    GradualSens::exact(Sens::INF)
}

fn scale2(e: &(SensEnv, SensEnv), g: GradualSens) -> (SensEnv, SensEnv) {
    (e.0.scale(g), e.1.scale(g))
}

impl<'a> Machine<'a> {
    pub fn new(seed: u64) -> Machine<'a> {
        Machine { stack: Vec::new(), steps: 0, budget: DEFAULT_STEP_BUDGET, rng: ChaCha8Rng::seed_from_u64(seed), trace: None }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_trace(mut self, f: impl FnMut(&TraceStep) + 'a) -> Self {
        self.trace = Some(Box::new(f));
        self
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn emit(&mut self, rule: &'static str, redex: impl FnOnce() -> String, ev: impl FnOnce() -> String) {
        if let Some(t) = self.trace.as_mut() {
            t(&TraceStep { rule, redex: redex(), evidence: ev() });
        }
    }

    /// Evaluates a closed term.
    pub fn eval(&mut self, t: &Term) -> Result<Value, RuntimeError> {
        self.eval_in(Arc::new(t.clone()), &Env::new())
    }

    pub fn eval_in(&mut self, t: Arc<Term>, env: &Env) -> Result<Value, RuntimeError> {
        self.run(Ok(Control::Eval(t, env.clone())))
    }

    /// `f v` for a function value `f`.
    pub fn call(&mut self, f: Value, arg: Value) -> Result<Value, RuntimeError> {
        let base = self.stack.len();
        let start = self.apply(f, arg, Span::default());
        self.run_from(start, base)
    }

    /// `v [Σ]` for a resource abstraction `v`.
    pub fn instantiate(&mut self, v: Value, s: &SensEnv) -> Result<Value, RuntimeError> {
        let base = self.stack.len();
        let start = self.ret(Frame::ResApp { s: s.clone(), span: Span::default() }, v);
        self.run_from(start, base)
    }

    fn run(&mut self, start: Step) -> Result<Value, RuntimeError> {
        let base = self.stack.len();
        self.run_from(start, base)
    }

    fn run_from(&mut self, start: Step, base: usize) -> Result<Value, RuntimeError> {
        let mut next = start;
        loop {
            let control = match next {
                Ok(c) => c,
                Err(e) => match self.unwind(base, &e) {
                    Some(c) => c,
                    None => return Err(e),
                },
            };
            self.steps += 1;
            if self.steps > self.budget {
                self.stack.truncate(base);
                return Err(RuntimeError::BudgetExhausted { steps: self.budget });
            }
            next = match control {
                Control::Eval(t, env) => self.eval_term(&t, env),
                Control::Ret(v) => {
                    if self.stack.len() == base {
                        return Ok(v);
                    }
                    let frame = self.stack.pop().expect("non-empty stack");
                    self.ret(frame, v)
                }
            };
        }
    }

    /// Pops to the nearest enclosing `try` able to handle `e`.
    fn unwind(&mut self, base: usize, e: &RuntimeError) -> Option<Control> {
        while self.stack.len() > base {
            if let Some(Frame::Try { handler, env }) = self.stack.pop() {
                if e.catchable() {
                    self.emit("r-catch", || e.kind().to_string(), String::new);
                    return Some(Control::Eval(handler, env));
                }
            }
        }
        None
    }

    fn eval_term(&mut self, t: &Term, env: Env) -> Step {
        let ret = |v: Value| Ok(Control::Ret(v));
        match t {
            Term::Const(e, c, g) => ret(Value::new(env.ev(e), Payload::Const(*c), env.ty(g))),
            Term::Lam(e, x, pt, body, g) => {
                let cl = Closure { param: x.clone(), param_ty: env.ty(pt), body: body.clone(), env: env.clone() };
                ret(Value::new(env.ev(e), Payload::Closure(Arc::new(cl)), env.ty(g)))
            }
            Term::ResLam(e, r, body, g) => {
                let rr = r.refresh();
                let ev = env.ev(e);
                let ty = env.ty(g);
                let inner = env.bind_static(r.clone(), SensEnv::unit(rr.clone()));
                self.stack.push(Frame::ResLamBody { ev, r: rr, ty });
                Ok(Control::Eval(body.clone(), inner))
            }
            Term::Pair(e, a, b, g) => {
                self.stack.push(Frame::PairL { b: b.clone(), env: env.clone(), ev: env.ev(e), ty: env.ty(g) });
                Ok(Control::Eval(a.clone(), env))
            }
            Term::Inl(e, a, g) | Term::Inr(e, a, g) | Term::Fold(e, a, g) => {
                let kind = match t {
                    Term::Inl(..) => WrapKind::Inl,
                    Term::Inr(..) => WrapKind::Inr,
                    _ => WrapKind::Fold,
                };
                self.stack.push(Frame::Wrap { kind, ev: env.ev(e), ty: env.ty(g) });
                Ok(Control::Eval(a.clone(), env))
            }
            Term::List(e, xs, g) => {
                let (ev, ty) = (env.ev(e), env.ty(g));
                match xs.split_first() {
                    None => ret(Value::new(ev, Payload::List(Arc::new(Vec::new())), ty)),
                    Some((first, rest)) => {
                        let mut rest: Vec<_> = rest.to_vec();
                        rest.reverse();
                        self.stack.push(Frame::List { rest, done: Vec::new(), env: env.clone(), ev, ty });
                        Ok(Control::Eval(first.clone(), env))
                    }
                }
            }
            Term::Var(x) => {
                let Some(node) = env.lookup(x) else {
                    return Err(stuck(format!("unbound variable {:?}", x), Span::default()));
                };
                match &node.binding {
                    Binding::Val(v) => ret(env.value(v)),
                    Binding::Fix(g, body) => {
                        let g = env.ty(g);
                        self.emit("r-fix", || x.to_string(), || format!("I({}, {})", g, g));
                        let fenv = Env { vars: Some(node.clone()), rho: env.rho.clone() };
                        self.stack.push(Frame::Ascr { ev: Evidence::refl(&g), ty: g, span: Span::default() });
                        Ok(Control::Eval(body.clone(), fenv))
                    }
                }
            }
            Term::Fix(f, g, body) => {
                let fenv = env.push(f.clone(), Binding::Fix(g.clone(), body.clone()));
                Ok(Control::Eval(body.clone(), fenv))
            }
            Term::Op(op, args, span) => {
                let mut rest: Vec<_> = args.clone();
                rest.reverse();
                let first = rest.pop().ok_or_else(|| stuck("nullary operator", *span))?;
                self.stack.push(Frame::Op { op: *op, args: rest, done: Vec::new(), env: env.clone(), span: *span });
                Ok(Control::Eval(first, env))
            }
            Term::App(f, a, span) => {
                self.stack.push(Frame::AppArg { arg: a.clone(), env: env.clone(), span: *span });
                Ok(Control::Eval(f.clone(), env))
            }
            Term::ResApp(f, s, span) => {
                self.stack.push(Frame::ResApp { s: env.sens(s), span: *span });
                Ok(Control::Eval(f.clone(), env))
            }
            Term::Ascr(e, a, g, span) => {
                self.stack.push(Frame::Ascr { ev: env.ev(e), ty: env.ty(g), span: *span });
                Ok(Control::Eval(a.clone(), env))
            }
            Term::Fst(a, span) => {
                self.stack.push(Frame::Fst(*span));
                Ok(Control::Eval(a.clone(), env))
            }
            Term::Snd(a, span) => {
                self.stack.push(Frame::Snd(*span));
                Ok(Control::Eval(a.clone(), env))
            }
            Term::Unfold(a, span) => {
                self.stack.push(Frame::Unfold(*span));
                Ok(Control::Eval(a.clone(), env))
            }
            Term::Case { scrut, left, right, tys, span } => {
                let tys = Branches { left: env.ty(&tys.left), right: env.ty(&tys.right), join: env.ty(&tys.join) };
                self.stack.push(Frame::Case { left: left.clone(), right: right.clone(), tys, env: env.clone(), span: *span });
                Ok(Control::Eval(scrut.clone(), env))
            }
            Term::If { cond, then, els, tys, span } => {
                let tys = Branches { left: env.ty(&tys.left), right: env.ty(&tys.right), join: env.ty(&tys.join) };
                self.stack.push(Frame::If { then: then.clone(), els: els.clone(), tys, env: env.clone(), span: *span });
                Ok(Control::Eval(cond.clone(), env))
            }
            Term::Try(a, b, _) => {
                self.stack.push(Frame::Try { handler: b.clone(), env: env.clone() });
                Ok(Control::Eval(a.clone(), env))
            }
            Term::Get(l, i, span) => {
                self.stack.push(Frame::GetL { i: i.clone(), env: env.clone(), span: *span });
                Ok(Control::Eval(l.clone(), env))
            }
            Term::Length(l, span) => {
                self.stack.push(Frame::Length(*span));
                Ok(Control::Eval(l.clone(), env))
            }
            Term::IndexOf(l, p, g, span) => {
                self.stack.push(Frame::IndexOfL { p: p.clone(), env: env.clone(), ty: env.ty(g), span: *span });
                Ok(Control::Eval(l.clone(), env))
            }
            Term::Laplace(v, scale, eps, span) => {
                self.stack.push(Frame::LaplaceV { eps: eps.clone(), env: env.clone(), scale: *scale, span: *span });
                Ok(Control::Eval(v.clone(), env))
            }
        }
    }

    /// Pushes `ε □ :: G` and continues with `v` in the hole.
    fn ascribe_then(&mut self, v: Value, ev: Evidence, ty: SType, span: Span) -> Step {
        self.stack.push(Frame::Ascr { ev, ty, span });
        Ok(Control::Ret(v))
    }

    fn ret(&mut self, frame: Frame, v: Value) -> Step {
        match frame {
            Frame::Ascr { ev, ty, span } => {
                self.emit("r-ascr", || v.to_string(), || ev.to_string());
                Ok(Control::Ret(ascribe(v, &ev, ty, span)?))
            }
            Frame::Op { op, mut args, mut done, env, span } => {
                done.push(v);
                if let Some(next) = args.pop() {
                    self.stack.push(Frame::Op { op, args, done, env: env.clone(), span });
                    return Ok(Control::Eval(next, env));
                }
                let evs: Vec<Evidence> = done.iter().map(|v| v.ev.clone()).collect();
                let tys: Vec<SType> = done.iter().map(|v| v.ty.clone()).collect();
                let cs = done.iter().map(|v| v.as_const()).collect::<Option<Vec<_>>>();
                let cs = cs.ok_or_else(|| stuck(format!("operator {} on a non-constant", op.symbol()), span))?;
                let c = op.apply(&cs).map_err(|e| match e {
                    OpError::DivisionByZero => RuntimeError::DivisionByZero { span },
                    OpError::Mismatch => stuck(format!("operator {} applied to mismatched constants", op.symbol()), span),
                })?;
                let ev = op.result_evidence(&evs).ok_or_else(|| stuck("operator evidence", span))?;
                let ty = op.result_type(&tys).ok_or_else(|| stuck("operator type", span))?;
                self.emit(
                    "r-op",
                    || format!("{} {}", op.symbol(), done.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")),
                    || ev.to_string(),
                );
                Ok(Control::Ret(Value::new(ev, Payload::Const(c), ty)))
            }
            Frame::AppArg { arg, env, span } => {
                self.stack.push(Frame::AppCall { f: v, span });
                Ok(Control::Eval(arg, env))
            }
            Frame::AppCall { f, span } => self.apply(f, v, span),
            Frame::ResApp { s, span } => {
                let Payload::ResAbs(r, inner) = &v.u else {
                    return Err(stuck("instantiation of a non-abstraction", span));
                };
                let ev = v.ev.i_inst(&s).ok_or_else(|| stuck("inst evidence", span))?;
                let ty = v.ty.inst(&s).ok_or_else(|| stuck("inst type", span))?;
                self.emit("r-inst", || format!("{} [{}]", v, s), || ev.to_string());
                let body = inner.subst_res(r, &s);
                self.ascribe_then(body, ev, ty, span)
            }
            Frame::ResLamBody { ev, r, ty } => Ok(Control::Ret(Value::new(ev, Payload::ResAbs(r, Arc::new(v)), ty))),
            Frame::PairL { b, env, ev, ty } => {
                self.stack.push(Frame::PairR { a: v, ev, ty });
                Ok(Control::Eval(b, env))
            }
            Frame::PairR { a, ev, ty } => Ok(Control::Ret(Value::new(ev, Payload::Pair(Arc::new(a), Arc::new(v)), ty))),
            Frame::Wrap { kind, ev, ty } => {
                let v = Arc::new(v);
                let u = match kind {
                    WrapKind::Inl => Payload::Inl(v),
                    WrapKind::Inr => Payload::Inr(v),
                    WrapKind::Fold => Payload::Fold(v),
                };
                Ok(Control::Ret(Value::new(ev, u, ty)))
            }
            Frame::Fst(span) | Frame::Snd(span) => {
                let first = matches!(frame, Frame::Fst(_));
                let Payload::Pair(a, b) = &v.u else { return Err(stuck("projection of a non-pair", span)) };
                let (ev, ty) = if first {
                    (v.ev.i_first(), v.ty.first())
                } else {
                    (v.ev.i_second(), v.ty.second())
                };
                let (ev, ty) = (ev.ok_or_else(|| stuck("pair evidence", span))?, ty.ok_or_else(|| stuck("pair type", span))?);
                self.emit(if first { "r-fst" } else { "r-snd" }, || v.to_string(), || ev.to_string());
                let part = if first { a } else { b };
                self.ascribe_then((**part).clone(), ev, ty, span)
            }
            Frame::Unfold(span) => {
                let Payload::Fold(inner) = &v.u else { return Err(stuck("unfold of a non-fold", span)) };
                let ev = v.ev.i_unf().ok_or_else(|| stuck("unfold evidence", span))?;
                let ty = v.ty.unf().ok_or_else(|| stuck("unfold type", span))?;
                self.emit("r-unfold", || v.to_string(), || ev.to_string());
                self.ascribe_then((**inner).clone(), ev, ty, span)
            }
            Frame::Case { left, right, tys, env, span } => {
                let (is_left, inner) = match &v.u {
                    Payload::Inl(x) => (true, x.clone()),
                    Payload::Inr(x) => (false, x.clone()),
                    _ => return Err(stuck("case on a non-sum", span)),
                };
                let (proj_ev, proj_ty) =
                    if is_left { (v.ev.i_left(), v.ty.left()) } else { (v.ev.i_right(), v.ty.right()) };
                let proj_ev = proj_ev.ok_or_else(|| stuck("sum evidence", span))?;
                let proj_ty = proj_ty.ok_or_else(|| stuck("sum type", span))?;
                let bound = ascribe((*inner).clone(), &proj_ev, proj_ty, span)?;
                let (ev, ty) = branch_evidence(&v, if is_left { &tys.left } else { &tys.right }, &tys.join, span)?;
                self.emit(if is_left { "r-case-1" } else { "r-case-2" }, || v.to_string(), || ev.to_string());
                let (x, body) = if is_left { left } else { right };
                self.stack.push(Frame::Ascr { ev, ty, span });
                Ok(Control::Eval(body, env.bind(x, bound)))
            }
            Frame::If { then, els, tys, env, span } => {
                let b = match v.u {
                    Payload::Const(Const::Bool(b)) => b,
                    _ => return Err(stuck("if on a non-Boolean", span)),
                };
                let (ev, ty) = branch_evidence(&v, if b { &tys.left } else { &tys.right }, &tys.join, span)?;
                self.emit(if b { "r-if-true" } else { "r-if-false" }, || v.to_string(), || ev.to_string());
                self.stack.push(Frame::Ascr { ev, ty, span });
                Ok(Control::Eval(if b { then } else { els }, env))
            }
            Frame::Try { .. } => Ok(Control::Ret(v)),
            Frame::List { mut rest, mut done, env, ev, ty } => {
                done.push(v);
                match rest.pop() {
                    Some(next) => {
                        self.stack.push(Frame::List { rest, done, env: env.clone(), ev, ty });
                        Ok(Control::Eval(next, env))
                    }
                    None => Ok(Control::Ret(Value::new(ev, Payload::List(Arc::new(done)), ty))),
                }
            }
            Frame::GetL { i, env, span } => {
                self.stack.push(Frame::GetR { l: v, span });
                Ok(Control::Eval(i, env))
            }
            Frame::GetR { l, span } => {
                let Payload::List(xs) = &l.u else { return Err(stuck("get on a non-list", span)) };
                let i = v.as_real().ok_or_else(|| stuck("non-numeric index", span))?;
                if i.fract() != 0.0 || i < 0.0 || i >= xs.len() as f64 {
                    return Err(RuntimeError::UserError {
                        message: format!("index {} out of bounds for a list of length {}", Const::Real(i), xs.len()),
                        span,
                    });
                }
                let elem_ev = l.ev.i_elem().ok_or_else(|| stuck("list evidence", span))?;
                let ev = elem_ev.plus_eff2(&scale2(&v.ev.eff2(), inf()));
                let ty = l.ty.elem().ok_or_else(|| stuck("list type", span))?.plus(&v.ty.eff().scale(inf()));
                self.emit("r-get", || format!("{}.get({})", l, v), || ev.to_string());
                self.ascribe_then(xs[i as usize].clone(), ev, ty, span)
            }
            Frame::Length(span) => {
                let Payload::List(xs) = &v.u else { return Err(stuck("length of a non-list", span)) };
                let (lo, hi) = scale2(&v.ev.eff2(), inf());
                let ev = Evidence::new(SType::real(lo), SType::real(hi));
                self.emit("r-length", || v.to_string(), || ev.to_string());
                let ty = SType::real(v.ty.eff().scale(inf()));
                Ok(Control::Ret(Value::new(ev, Payload::Const(Const::Real(xs.len() as f64)), ty)))
            }
            Frame::IndexOfL { p, env, ty, span } => {
                self.stack.push(Frame::IndexOfP { l: v, ty, span });
                Ok(Control::Eval(p, env))
            }
            Frame::IndexOfP { l, ty, span } => {
                let cod = v.ev.i_cod().ok_or_else(|| stuck("predicate evidence", span))?;
                let (l_lo, l_hi) = l.ev.eff2();
                let (p_lo, p_hi) = v.ev.eff2();
                let (c_lo, c_hi) = cod.eff2();
                let ev = Evidence::new(
                    SType::real(l_lo.add(&p_lo).add(&c_lo).scale(inf())),
                    SType::real(l_hi.add(&p_hi).add(&c_hi).scale(inf())),
                );
                self.index_of_next(l, v, 0, ev, ty, span)
            }
            Frame::IndexOfIter { l, p, k, ev, ty, span } => match v.u {
                Payload::Const(Const::Bool(true)) => {
                    self.emit("r-indexOf", || format!("found at {}", k), || ev.to_string());
                    Ok(Control::Ret(Value::new(ev, Payload::Const(Const::Real(k as f64)), ty)))
                }
                Payload::Const(Const::Bool(false)) => self.index_of_next(l, p, k + 1, ev, ty, span),
                _ => Err(stuck("indexOf predicate returned a non-Boolean", span)),
            },
            Frame::LaplaceV { eps, env, scale, span } => {
                self.stack.push(Frame::LaplaceE { v, scale, span });
                Ok(Control::Eval(eps, env))
            }
            Frame::LaplaceE { v: x, scale, span } => {
                let c = x.as_real().ok_or_else(|| stuck("laplace of a non-number", span))?;
                let eps = v.as_real().ok_or_else(|| stuck("non-numeric epsilon", span))?;
                if !(eps > 0.0 && eps.is_finite()) {
                    return Err(RuntimeError::UserError {
                        message: format!("laplace epsilon must be positive, got {}", Const::Real(eps)),
                        span,
                    });
                }
                let noise = sample_laplace(scale.value() / eps, &mut self.rng);
                let out = Value::constant(Const::Real(c + noise));
                self.emit("r-laplace", || format!("laplace({}, {}, {})", x, scale, eps), || out.ev.to_string());
                Ok(Control::Ret(out))
            }
        }
    }

    /// Applies the predicate to element `k`, or returns −1 past the end.
    fn index_of_next(&mut self, l: Value, p: Value, k: usize, ev: Evidence, ty: SType, span: Span) -> Step {
        let Payload::List(xs) = &l.u else { return Err(stuck("indexOf on a non-list", span)) };
        let Some(x) = xs.get(k).cloned() else {
            self.emit("r-indexOf", || "not found".to_string(), || ev.to_string());
            return Ok(Control::Ret(Value::new(ev, Payload::Const(Const::Real(-1.0)), ty)));
        };
        let elem_ev = l.ev.i_elem().ok_or_else(|| stuck("list evidence", span))?;
        let elem_ty = l.ty.elem().ok_or_else(|| stuck("list type", span))?;
        let x = ascribe(x, &elem_ev, elem_ty, span)?;
        self.stack.push(Frame::IndexOfIter { l, p: p.clone(), k, ev, ty, span });
        self.apply(p, x, span)
    }

    /// r-app.
    fn apply(&mut self, f: Value, arg: Value, span: Span) -> Step {
        let Payload::Closure(cl) = &f.u else { return Err(stuck("application of a non-function", span)) };
        let dom = f.ev.i_dom().ok_or_else(|| stuck("function evidence", span))?;
        let cod_ev = f.ev.i_cod().ok_or_else(|| stuck("function evidence", span))?;
        let cod_ty = f.ty.cod().ok_or_else(|| stuck("function type", span))?;
        self.emit("r-app", || format!("{} ({})", f, arg), || dom.to_string());
        let arg = ascribe(arg, &dom, cl.param_ty.clone(), span)?;
        self.stack.push(Frame::Ascr { ev: cod_ev, ty: cod_ty, span });
        Ok(Control::Eval(cl.body.clone(), cl.env.bind(cl.param.clone(), arg)))
    }
}

/// `I(Gᵢ, J) ⊔² eff²(ε₁)` and `J ⊔ eff(G₁)` for a conditional's scrutinee `v`.
fn branch_evidence(v: &Value, branch: &SType, join: &SType, span: Span) -> Result<(Evidence, SType), RuntimeError> {
    let ev = interior(branch, join).ok_or_else(|| stuck("branch type below its join", span))?;
    Ok((ev.join_eff2(&v.ev.eff2()), join.join_eff(&v.ty.eff())))
}

/// Evaluates a closed term with the default budget.
pub fn eval(t: &Term, seed: u64) -> Result<Value, RuntimeError> {
    Machine::new(seed).eval(t)
}
