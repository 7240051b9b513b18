//! Randomized checks of gradual metric preservation.

use std::fmt;

use gsens_core::eval::{msens, Machine, Payload, RuntimeError, Value, DEFAULT_STEP_BUDGET};
use gsens_core::{Const, Sens, SensEnv, SType, StaticSensEnv, Type};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::target::Target;
use crate::HarnessError;

/// Absolute slack absorbing floating-point rounding in distance checks.
pub const TOLERANCE: f64 = 1e-9;

/// Default step budget for one run of a target.
pub const TRIAL_STEP_BUDGET: u64 = 100_000;

#[derive(Clone, Debug)]
pub struct MPSpec {
    pub name: String,
    pub target: Target,
    /// Claimed sensitivity of the result, over the target's resources.
    pub sigma: SensEnv,
    pub delta: StaticSensEnv,
    /// Range for the first input of each real parameter.
    pub range: (f64, f64),
    pub step_budget: u64,
}

impl MPSpec {
    /// The declared result effect is the claim; every resource is at distance 1.
    pub fn new(name: &str, target: Target) -> MPSpec {
        let sigma = target.result.eff();
        let delta = StaticSensEnv::from_entries(target.resources().map(|r| (r.clone(), Sens::ONE)));
        MPSpec { name: name.to_string(), target, sigma, delta, range: (-10.0, 10.0), step_budget: TRIAL_STEP_BUDGET }
    }

    pub fn from_source(name: &str, src: &str) -> Result<MPSpec, HarnessError> {
        Ok(MPSpec::new(name, Target::from_source(src)?))
    }

    pub fn with_sigma(mut self, sigma: SensEnv) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_delta(mut self, delta: StaticSensEnv) -> Result<Self, HarnessError> {
        let known: Vec<_> = self.target.resources().collect();
        if let Some((r, _)) = delta.iter().find(|(r, _)| !known.contains(r)) {
            return Err(HarnessError::Spec(format!("distance mentions `{}`, which the target does not bind", r)));
        }
        self.delta = StaticSensEnv::from_entries(
            known.iter().map(|r| ((*r).clone(), delta.get(r))).filter(|(_, s)| !s.is_zero()),
        );
        Ok(self)
    }

    pub fn with_range(mut self, lo: f64, hi: f64) -> Self {
        self.range = (lo, hi);
        self
    }

    pub fn with_step_budget(mut self, budget: u64) -> Self {
        self.step_budget = budget.min(DEFAULT_STEP_BUDGET);
        self
    }

    /// Both the claim and the parameter effects avoid `∞`, and so does `Δ`.
    pub fn is_bounded(&self) -> bool {
        self.sigma.is_bounded() && self.delta.is_bounded() && self.target.params().all(|g| g.eff().is_bounded())
    }

    /// `upper(Σ)·Δ`.
    pub fn bound(&self) -> Sens {
        self.sigma.upper().dot(&self.delta)
    }
}

/// `d_B(v1, v2)`.
pub fn distance(ty: &SType, v1: &Value, v2: &Value) -> Result<Sens, HarnessError> {
    let misuse = || HarnessError::Spec(format!("no distance on `{}`", ty));
    let (Payload::Const(a), Payload::Const(b)) = (&v1.u, &v2.u) else { return Err(misuse()) };
    match (ty.ty(), a, b) {
        (Some(Type::Real), Const::Real(x), Const::Real(y)) => Ok(Sens::new((x - y).abs()).unwrap_or(Sens::INF)),
        (Some(Type::Bool), Const::Bool(x), Const::Bool(y)) => Ok(if x == y { Sens::ZERO } else { Sens::INF }),
        (Some(Type::Unit), Const::Unit, Const::Unit) => Ok(Sens::ZERO),
        _ => Err(misuse()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// Output distance exceeds `upper(Σ)·Δ`.
    Distance,
    /// The monitored sensitivity of a result lies outside `Σ`.
    Adequacy,
    /// One run produced a value and the other an error.
    Termination,
    /// A generated input pair is further apart than its budget.
    Generator,
}

#[derive(Clone, Debug)]
pub struct Violation {
    pub trial: usize,
    pub kind: ViolationKind,
    pub inputs: (Vec<String>, Vec<String>),
    pub outputs: (String, String),
    pub bound: Sens,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "trial {}: {:?} violation, inputs ({}) / ({}), outputs {} / {}, bound {}",
            self.trial,
            self.kind,
            self.inputs.0.join(", "),
            self.inputs.1.join(", "),
            self.outputs.0,
            self.outputs.1,
            self.bound
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct MPReport {
    pub name: String,
    pub trials: usize,
    /// Pairs where both runs produced values.
    pub successes: usize,
    /// Pairs where at least one run failed.
    pub error_pairs: usize,
    pub violations: Vec<Violation>,
    /// Largest observed `d(v1, v2) / bound` over finite, non-zero bounds.
    pub max_ratio: f64,
}

impl MPReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn termination_mismatches(&self) -> usize {
        self.violations.iter().filter(|v| v.kind == ViolationKind::Termination).count()
    }
}

impl fmt::Display for MPReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12} {}", "program", self.name)?;
        writeln!(f, "{:<12} {}", "trials", self.trials)?;
        writeln!(f, "{:<12} {}", "successes", self.successes)?;
        writeln!(f, "{:<12} {}", "error pairs", self.error_pairs)?;
        writeln!(f, "{:<12} {}", "violations", self.violations.len())?;
        write!(f, "{:<12} {:.6}", "max ratio", self.max_ratio)?;
        for v in &self.violations {
            write!(f, "\n  {}", v)?;
        }
        Ok(())
    }
}

struct Pair {
    left: Vec<Value>,
    right: Vec<Value>,
    budgets: Vec<Sens>,
    seed: u64,
}

fn generate(spec: &MPSpec, rng: &mut ChaCha8Rng) -> Pair {
    // Per-resource distance d_r ≤ Δ(r), occasionally exactly Δ(r).
    let d = StaticSensEnv::from_entries(spec.delta.iter().map(|(r, s)| {
        let s = if s.is_inf() || rng.random_bool(0.25) { s } else { Sens::new(s.value() * rng.random::<f64>()).unwrap() };
        (r.clone(), s)
    }));
    let (lo, hi) = spec.range;
    let mut pair = Pair { left: Vec::new(), right: Vec::new(), budgets: Vec::new(), seed: rng.random() };
    for g in spec.target.params() {
        let budget = g.eff().lower().dot(&d);
        let (a, b) = match g.ty() {
            Some(Type::Real) => {
                let x = rng.random_range(lo..=hi);
                let max = if budget.is_inf() { hi - lo } else { budget.value() };
                let mag = if rng.random_bool(0.25) { max } else { max * rng.random::<f64>() };
                let delta = if rng.random_bool(0.5) { mag } else { -mag };
                (Const::Real(x), Const::Real(x + delta))
            }
            Some(Type::Bool) => {
                let x = rng.random_bool(0.5);
                let flip = budget.is_inf() && rng.random_bool(0.5);
                (Const::Bool(x), Const::Bool(x ^ flip))
            }
            _ => (Const::Unit, Const::Unit),
        };
        pair.left.push(Value::input(a, g));
        pair.right.push(Value::input(b, g));
        pair.budgets.push(budget);
    }
    pair
}

enum TrialResult {
    Values,
    Errors,
    Violations(Vec<Violation>),
}

fn show(vs: &[Value]) -> Vec<String> {
    vs.iter().map(|v| v.u.to_string()).collect()
}

fn show_outcome(r: &Result<Value, RuntimeError>) -> String {
    match r {
        Ok(v) => v.u.to_string(),
        Err(e) => format!("error({})", e.kind()),
    }
}

fn trial(spec: &MPSpec, i: usize, seed: u64, termination_sensitive: bool) -> (TrialResult, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    let pair = generate(spec, &mut rng);
    let bound = spec.bound();
    let mut violations = Vec::new();
    let mut violation = |kind, r1: &Result<Value, RuntimeError>, r2: &Result<Value, RuntimeError>| {
        violations.push(Violation {
            trial: i,
            kind,
            inputs: (show(&pair.left), show(&pair.right)),
            outputs: (show_outcome(r1), show_outcome(r2)),
            bound,
        })
    };

    let params: Vec<_> = spec.target.params().collect();
    let generator_ok = params.iter().zip(&pair.left).zip(&pair.right).zip(&pair.budgets).all(|(((g, a), b), budget)| {
        distance(g, a, b).is_ok_and(|d| d.is_inf() && budget.is_inf() || d.value() <= budget.value() + TOLERANCE)
    });

    let run = |args: &[Value]| {
        let mut m = Machine::new(pair.seed).with_budget(spec.step_budget);
        spec.target.apply(&mut m, args)
    };
    let r1 = run(&pair.left);
    let r2 = run(&pair.right);
    if !generator_ok {
        violation(ViolationKind::Generator, &r1, &r2);
    }
    for r in [&r1, &r2] {
        if let Ok(v) = r {
            if !msens(&v.ev).embed().precise_in(&spec.sigma) {
                violation(ViolationKind::Adequacy, &r1, &r2);
            }
        }
    }
    let mut ratio = 0.0;
    let both = match (&r1, &r2) {
        (Ok(v1), Ok(v2)) => {
            let d = distance(&spec.target.result, v1, v2).expect("base result type");
            let within = bound.is_inf() || (!d.is_inf() && d.value() <= bound.value() + TOLERANCE);
            if !within {
                violation(ViolationKind::Distance, &r1, &r2);
            } else if !bound.is_inf() && !bound.is_zero() {
                ratio = d.value() / bound.value();
            }
            true
        }
        (Err(_), Err(_)) => false,
        _ => {
            if termination_sensitive {
                violation(ViolationKind::Termination, &r1, &r2);
            }
            false
        }
    };
    let result = if !violations.is_empty() {
        TrialResult::Violations(violations)
    } else if both {
        TrialResult::Values
    } else {
        TrialResult::Errors
    };
    (result, ratio)
}

fn check(spec: &MPSpec, pairs: usize, seed: u64, ts: bool) -> MPReport {
    let results: Vec<_> = (0..pairs).into_par_iter().map(|i| trial(spec, i, seed, ts)).collect();
    let mut report = MPReport { name: spec.name.clone(), trials: pairs, ..Default::default() };
    for (r, ratio) in results {
        report.max_ratio = report.max_ratio.max(ratio);
        match r {
            TrialResult::Values => report.successes += 1,
            TrialResult::Errors => report.error_pairs += 1,
            TrialResult::Violations(vs) => report.violations.extend(vs),
        }
    }
    report
}

/// Termination-insensitive check: pairs where either run fails are counted
/// but never violate.
pub fn mp_check(spec: &MPSpec, pairs: usize, seed: u64) -> MPReport {
    check(spec, pairs, seed, false)
}

/// Termination-sensitive check; the claim and the distances must be bounded.
pub fn ts_mp_check(spec: &MPSpec, pairs: usize, seed: u64) -> Result<MPReport, HarnessError> {
    if !spec.is_bounded() {
        return Err(HarnessError::Unbounded(format!(
            "`{}` claims {} at distance {}",
            spec.name,
            spec.sigma,
            spec.delta.embed()
        )));
    }
    Ok(check(spec, pairs, seed, true))
}
