//! The function under test in a corpus program.

use gsens_core::eval::{ascribe_value, Machine, RuntimeError, Value};
use gsens_core::session::{GsError, ItemResult, Session};
use gsens_core::syntax::{parse_effect, EffExpr};
use gsens_core::{ResourceVar, SType, SensEnv, StaticSensEnv, Type};

use crate::HarnessError;

#[derive(Clone, Debug)]
pub enum Step {
    /// Instantiate a resource abstraction at a fresh named resource.
    Inst(ResourceVar),
    /// Apply to an argument of this (base) type.
    Arg(SType),
}

/// The last top-level function binding of a program, opened up: resource
/// binders are instantiated at named resources and base-typed parameters are
/// peeled off until a base result type remains.
#[derive(Clone, Debug)]
pub struct Target {
    pub name: String,
    pub value: Value,
    pub steps: Vec<Step>,
    pub result: SType,
}

impl Target {
    pub fn from_source(src: &str) -> Result<Target, HarnessError> {
        let items = Session::new().run_source(src).map_err(HarnessError::Program)?;
        Target::from_items(&items)
    }

    pub fn from_items(items: &[ItemResult]) -> Result<Target, HarnessError> {
        let (name, ty, value) = items
            .iter()
            .rev()
            .find_map(|it| match it {
                ItemResult::Bound { name, ty, value: Some(v) }
                    if matches!(ty.ty(), Some(Type::Forall(..) | Type::Arrow(..))) =>
                {
                    Some((name.clone(), ty.clone(), v.clone()))
                }
                _ => None,
            })
            .ok_or(HarnessError::NoTarget)?;
        let mut steps = Vec::new();
        let mut ty = ty;
        loop {
            match ty.ty() {
                Some(Type::Forall(r, _)) => {
                    let named = ResourceVar::named(r.name());
                    ty = ty.inst(&SensEnv::unit(named.clone())).expect("forall type");
                    steps.push(Step::Inst(named));
                }
                Some(Type::Arrow(d, _)) => {
                    if !d.is_base() {
                        return Err(HarnessError::NonBaseParam(d.to_string()));
                    }
                    steps.push(Step::Arg(d.clone()));
                    ty = ty.cod().expect("arrow type");
                }
                _ => break,
            }
        }
        if !ty.is_base() {
            return Err(HarnessError::NonBaseResult(ty.to_string()));
        }
        Ok(Target { name, value, steps, result: ty })
    }

    pub fn params(&self) -> impl Iterator<Item = &SType> {
        self.steps.iter().filter_map(|s| match s {
            Step::Arg(g) => Some(g),
            Step::Inst(_) => None,
        })
    }

    pub fn resources(&self) -> impl Iterator<Item = &ResourceVar> {
        self.steps.iter().filter_map(|s| match s {
            Step::Inst(r) => Some(r),
            Step::Arg(_) => None,
        })
    }

    /// Runs the target on `args`. Each argument is first ascribed to its
    /// parameter type.
    pub fn apply(&self, m: &mut Machine<'_>, args: &[Value]) -> Result<Value, RuntimeError> {
        let mut args = args.iter();
        let mut v = self.value.clone();
        for step in &self.steps {
            v = match step {
                Step::Inst(r) => m.instantiate(v, &SensEnv::unit(r.clone()))?,
                Step::Arg(g) => {
                    let a = args.next().expect("one argument per parameter").clone();
                    m.call(v, ascribe_value(a, g)?)?
                }
            };
        }
        Ok(v)
    }
}

fn named_env(eff: &EffExpr) -> SensEnv {
    eff.iter().fold(SensEnv::empty(), |acc, t| acc.add(&SensEnv::single(ResourceVar::named(&t.res), t.coef)))
}

/// Parses a sensitivity effect such as `2r + ?s` over named resources.
pub fn parse_sens_env(src: &str) -> Result<SensEnv, HarnessError> {
    let eff = parse_effect(src).map_err(|e| HarnessError::Program(GsError::Syntax(e)))?;
    Ok(named_env(&eff))
}

/// Parses a distance environment; every coefficient must be a single value.
pub fn parse_distance(src: &str) -> Result<StaticSensEnv, HarnessError> {
    let env = parse_sens_env(src)?;
    if !env.is_static() {
        return Err(HarnessError::Spec(format!("distance `{}` must be static", src)));
    }
    Ok(env.lower())
}
