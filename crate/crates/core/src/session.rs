//! Incremental checking and evaluation of top-level items.
//!
//! Top-level `let res` resources stay free, so results report their
//! sensitivity in terms of the program's own resources.

use std::fmt;
use std::sync::Arc;

use crate::elab::{ascribe, ErrorCode, TypeEnv, TypeError};
use crate::eval::{Env, Machine, RuntimeError, TraceStep, Value, DEFAULT_STEP_BUDGET};
use crate::sens::{ResourceVar, SensEnv};
use crate::syntax::desugar::{DesugarError, Desugarer, TopItem};
use crate::syntax::{parse_expr, parse_program, Program, Span, SyntaxError};
use crate::types::SType;

#[derive(Clone, Debug)]
pub enum GsError {
    Syntax(SyntaxError),
    Desugar(DesugarError),
    Type(TypeError),
    Runtime(RuntimeError),
}

impl GsError {
    pub fn span(&self) -> Option<Span> {
        match self {
            GsError::Syntax(e) => Some(e.span()),
            GsError::Desugar(e) => Some(e.span),
            GsError::Type(e) => Some(e.span),
            GsError::Runtime(e) => e.span(),
        }
    }
}

impl fmt::Display for GsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GsError::Syntax(e) => write!(f, "{}", e),
            GsError::Desugar(e) => write!(f, "{}", e),
            GsError::Type(e) => write!(f, "{}", e),
            GsError::Runtime(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for GsError {}

impl From<SyntaxError> for GsError {
    fn from(e: SyntaxError) -> Self {
        GsError::Syntax(e)
    }
}

impl From<DesugarError> for GsError {
    fn from(e: DesugarError) -> Self {
        GsError::Desugar(e)
    }
}

impl From<TypeError> for GsError {
    fn from(e: TypeError) -> Self {
        GsError::Type(e)
    }
}

impl From<RuntimeError> for GsError {
    fn from(e: RuntimeError) -> Self {
        GsError::Runtime(e)
    }
}

/// What one item produced.
#[derive(Clone, Debug)]
pub enum ItemResult {
    Bound { name: String, ty: SType, value: Option<Value> },
    Value { ty: SType, value: Option<Value> },
}

impl ItemResult {
    pub fn ty(&self) -> &SType {
        match self {
            ItemResult::Bound { ty, .. } | ItemResult::Value { ty, .. } => ty,
        }
    }

    pub fn value(&self) -> Option<&Value> {
        match self {
            ItemResult::Bound { value, .. } | ItemResult::Value { value, .. } => value.as_ref(),
        }
    }
}

pub struct Session {
    desugarer: Desugarer,
    types: TypeEnv,
    env: Env,
    evaluate: bool,
    seed: u64,
    runs: u64,
    budget: u64,
    trace: Option<Box<dyn FnMut(&TraceStep)>>,
}

impl Default for Session {
    fn default() -> Self {
        Session::new()
    }
}

impl Session {
    pub fn new() -> Session {
        Session {
            desugarer: Desugarer::new(),
            types: TypeEnv::new(),
            env: Env::new(),
            evaluate: true,
            seed: 0,
            runs: 0,
            budget: DEFAULT_STEP_BUDGET,
            trace: None,
        }
    }

    /// Elaborate only; nothing is evaluated.
    pub fn check_only() -> Session {
        Session { evaluate: false, ..Session::new() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_trace(mut self, f: impl FnMut(&TraceStep) + 'static) -> Self {
        self.trace = Some(Box::new(f));
        self
    }

    /// Replaces the step observer for later evaluations.
    pub fn set_trace(&mut self, f: Option<Box<dyn FnMut(&TraceStep)>>) {
        self.trace = f;
    }

    /// Type of an expression in the current scope, without evaluating it.
    /// Resources the scope does not bind are taken as free.
    pub fn type_of(&mut self, src: &str) -> Result<SType, GsError> {
        let e = parse_expr(src)?;
        let g = self.desugarer.expr(&e)?;
        let mut types = self.types.clone();
        loop {
            match types.elaborate(&g) {
                Ok((_, ty)) => return Ok(ty),
                Err(err) if err.code == ErrorCode::UnboundResource => {
                    let text = src.get(err.span.lo as usize..err.span.hi as usize).unwrap_or("");
                    let start = text.rfind(|c: char| !(c.is_alphanumeric() || c == '_')).map_or(0, |i| i + 1);
                    let name = text[start..].trim_start_matches(|c: char| c.is_ascii_digit());
                    if name.is_empty() || types.has_resource_named(name) {
                        return Err(err.into());
                    }
                    types.bind_resource(name, ResourceVar::named(name));
                }
                Err(err) => return Err(err.into()),
            }
        }
    }

    pub fn types(&self) -> &TypeEnv {
        &self.types
    }

    /// Parses and runs a whole source text, returning one result per item.
    pub fn run_source(&mut self, src: &str) -> Result<Vec<ItemResult>, GsError> {
        self.run_program(&parse_program(src)?)
    }

    pub fn run_program(&mut self, prog: &Program) -> Result<Vec<ItemResult>, GsError> {
        let items = self.desugarer.program(prog)?;
        items.iter().map(|it| self.item(it)).collect()
    }

    /// The last value-producing item of `src`.
    pub fn run_last(&mut self, src: &str) -> Result<Option<ItemResult>, GsError> {
        Ok(self.run_source(src)?.pop())
    }

    pub fn desugarer(&mut self) -> &mut Desugarer {
        &mut self.desugarer
    }

    pub fn item(&mut self, it: &TopItem) -> Result<ItemResult, GsError> {
        match it {
            TopItem::Expr(e) => {
                let (t, ty) = self.types.elaborate(e)?;
                let value = self.run(t)?;
                Ok(ItemResult::Value { ty, value })
            }
            TopItem::Let { name, res, ty, value, .. } => {
                let (term, g) = match ty {
                    Some(t) => {
                        let g = self.types.resolve(t)?;
                        (self.types.elaborate_at(value, &g)?, g)
                    }
                    None => {
                        let (t, g) = self.types.elaborate(value)?;
                        (ascribe(t, &g, &g, value.span)?, g)
                    }
                };
                let (term, g) = if *res {
                    let r = if self.types.has_resource_named(name) {
                        ResourceVar::fresh(name)
                    } else {
                        ResourceVar::named(name)
                    };
                    let gx = g.with_eff(SensEnv::unit(r.clone()));
                    let term = ascribe(term, &g, &gx, value.span)?;
                    self.types.bind_resource(name, r);
                    (term, gx)
                } else {
                    (term, g)
                };
                let v = self.run(term)?;
                let var = self.types.bind_var(name, g.clone());
                if let Some(v) = &v {
                    self.env = self.env.bind(var, v.clone());
                }
                Ok(ItemResult::Bound { name: name.clone(), ty: g, value: v })
            }
        }
    }

    fn run(&mut self, t: crate::term::Term) -> Result<Option<Value>, RuntimeError> {
        if !self.evaluate {
            return Ok(None);
        }
        let seed = self.seed.wrapping_add(self.runs);
        self.runs += 1;
        let mut m = Machine::new(seed).with_budget(self.budget);
        if let Some(tr) = self.trace.as_mut() {
            m = m.with_trace(move |s| tr(s));
        }
        m.eval_in(Arc::new(t), &self.env).map(Some)
    }
}

/// Parses, desugars and elaborates `src` as one closed term: top-level
/// resources are bound by `let res` and instantiated at `∅`.
pub fn elaborate_closed(src: &str) -> Result<(crate::term::Term, SType), GsError> {
    let prog = parse_program(src)?;
    let items = Desugarer::new().program(&prog)?;
    let e = crate::elab::close_program(&items);
    Ok(TypeEnv::new().elaborate(&e)?)
}
