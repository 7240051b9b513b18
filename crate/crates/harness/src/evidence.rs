//! Random evidence and the algebraic laws of consistent transitivity.

use std::fmt;
use std::sync::Arc;

use gsens_core::{ctrans, interior, Evidence, GradualSens, ResourceVar, SType, Sens, SensEnv, Type};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const GRID: [f64; 6] = [0.0, 1.0, 2.0, 3.0, 5.0, f64::INFINITY];

#[derive(Clone, Debug)]
pub enum Shape {
    Real,
    Bool,
    Arrow(Box<Shape>, Box<Shape>),
    Prod(Box<Shape>, Box<Shape>),
    Sum(Box<Shape>, Box<Shape>),
}

pub fn random_shape(rng: &mut impl Rng, depth: u32) -> Shape {
    let k = if depth == 0 { rng.random_range(0..2) } else { rng.random_range(0..5) };
    let mut sub = || Box::new(random_shape(rng, depth.saturating_sub(1)));
    match k {
        0 => Shape::Real,
        1 => Shape::Bool,
        2 => Shape::Arrow(sub(), sub()),
        3 => Shape::Prod(sub(), sub()),
        _ => Shape::Sum(sub(), sub()),
    }
}

pub fn random_sens(rng: &mut impl Rng) -> GradualSens {
    let a = *GRID.choose(rng).unwrap();
    let b = *GRID.choose(rng).unwrap();
    GradualSens::from_f64(a.min(b), a.max(b)).unwrap()
}

fn random_env(rng: &mut impl Rng) -> SensEnv {
    let mut env = SensEnv::empty();
    for r in ["r", "s"] {
        if rng.random_bool(0.6) {
            env = env.add(&SensEnv::single(ResourceVar::named(r), random_sens(rng)));
        }
    }
    env
}

pub fn random_type(rng: &mut impl Rng, shape: &Shape) -> SType {
    let ty = match shape {
        Shape::Real => Type::Real,
        Shape::Bool => Type::Bool,
        Shape::Arrow(a, b) => Type::Arrow(random_type(rng, a), random_type(rng, b)),
        Shape::Prod(a, b) => Type::Prod(random_type(rng, a), random_type(rng, b)),
        Shape::Sum(a, b) => Type::Sum(random_type(rng, a), random_type(rng, b)),
    };
    SType::new(ty, random_env(rng))
}

/// The interior of two random types of `shape`; falls back to reflexive
/// evidence when the pair keeps being implausible.
pub fn random_evidence(rng: &mut impl Rng, shape: &Shape) -> Evidence {
    for _ in 0..20 {
        if let Some(e) = interior(&random_type(rng, shape), &random_type(rng, shape)) {
            return e;
        }
    }
    let g = random_type(rng, shape);
    interior(&g, &g).expect("reflexive interior")
}

/// Evidence for `G1 ≲ G2`, `G2 ≲ G3` and `G3 ≲ G4`: the interiors of a
/// random chain of types of one shape.
pub fn random_chain(rng: &mut impl Rng, shape: &Shape) -> [Evidence; 3] {
    'restart: loop {
        let mut prev = random_type(rng, shape);
        let mut chain = Vec::with_capacity(3);
        while chain.len() < 3 {
            let link = (0..20).find_map(|_| {
                let next = random_type(rng, shape);
                interior(&prev, &next).map(|e| (e, next))
            });
            let Some((e, next)) = link else { continue 'restart };
            chain.push(e);
            prev = next;
        }
        return chain.try_into().unwrap();
    }
}

/// Applies `f` to every sensitivity in `g`.
pub fn map_sens(g: &SType, f: &mut impl FnMut(GradualSens) -> GradualSens) -> SType {
    let SType::Eff(ty, eff) = g else { return g.clone() };
    let eff = SensEnv::from_entries(eff.iter().map(|(r, s)| (r.clone(), f(s))));
    let ty = match &**ty {
        Type::Arrow(a, b) => Type::Arrow(map_sens(a, f), map_sens(b, f)),
        Type::Prod(a, b) => Type::Prod(map_sens(a, f), map_sens(b, f)),
        Type::Sum(a, b) => Type::Sum(map_sens(a, f), map_sens(b, f)),
        Type::List(a) => Type::List(map_sens(a, f)),
        other => other.clone(),
    };
    SType::Eff(Arc::new(ty), eff)
}

/// A random sub-interval of `g`.
pub fn narrow_sens(g: GradualSens, rng: &mut impl Rng) -> GradualSens {
    let inside: Vec<f64> = GRID.iter().copied().filter(|x| *x >= g.lo().value() && *x <= g.hi().value()).collect();
    let mut pick = |keep: f64| if rng.random_bool(0.5) { keep } else { *inside.choose(rng).unwrap_or(&keep) };
    let a = pick(g.lo().value());
    let b = pick(g.hi().value());
    GradualSens::new(Sens::new(a.min(b)).unwrap(), Sens::new(a.max(b)).unwrap()).unwrap()
}

/// Evidence at least as precise as `e`.
pub fn refine(e: &Evidence, rng: &mut impl Rng) -> Evidence {
    Evidence::new(map_sens(&e.lhs, &mut |g| narrow_sens(g, rng)), map_sens(&e.rhs, &mut |g| narrow_sens(g, rng)))
}

/// `⟨3r, 5r⟩`, `⟨5r, [5,∞]r⟩`, `⟨[0,4]r, 4r⟩`: each adjacent pair composes,
/// but neither association of the three does.
pub fn interval_chain() -> [Evidence; 3] {
    let r = ResourceVar::named("r");
    let n = |lo: f64, hi: f64| SType::real(SensEnv::single(r.clone(), GradualSens::from_f64(lo, hi).unwrap()));
    [
        Evidence::new(n(3.0, 3.0), n(5.0, 5.0)),
        Evidence::new(n(5.0, 5.0), n(5.0, f64::INFINITY)),
        Evidence::new(n(0.0, 4.0), n(4.0, 4.0)),
    ]
}

#[derive(Clone, Debug, Default)]
pub struct LawReport {
    pub law: &'static str,
    pub trials: usize,
    /// Trials where the compared compositions were defined.
    pub defined: usize,
    pub failures: Vec<String>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<14} trials {:>7}  defined {:>7}  failures {}",
            self.law,
            self.trials,
            self.defined,
            self.failures.len()
        )?;
        for m in self.failures.iter().take(5) {
            write!(f, "\n  {}", m)?;
        }
        Ok(())
    }
}

fn trial_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

fn run_law(
    law: &'static str,
    trials: usize,
    seed: u64,
    f: impl Fn(&mut ChaCha8Rng) -> Result<bool, String> + Sync,
) -> LawReport {
    let results: Vec<_> = (0..trials).into_par_iter().map(|i| f(&mut trial_rng(seed, i))).collect();
    let mut report = LawReport { law, trials, ..Default::default() };
    for r in results {
        match r {
            Ok(defined) => report.defined += usize::from(defined),
            Err(m) => report.failures.push(m),
        }
    }
    report
}

/// `(ε1∘ε2)∘ε3` and `ε1∘(ε2∘ε3)` agree on definedness and value for
/// evidence chains `G1 ≲ G2 ≲ G3 ≲ G4`.
pub fn ctrans_assoc_fuzz(trials: usize, seed: u64) -> LawReport {
    run_law("associativity", trials, seed, |rng| {
        let shape = random_shape(rng, 1);
        let [e1, e2, e3] = random_chain(rng, &shape);
        let left = ctrans(&e1, &e2).and_then(|e| ctrans(&e, &e3));
        let right = ctrans(&e2, &e3).and_then(|e| ctrans(&e1, &e));
        if left == right {
            Ok(left.is_some())
        } else {
            Err(format!(
                "{} ∘ {} ∘ {}: left {:?}, right {:?}",
                e1,
                e2,
                e3,
                left.map(|e| e.to_string()),
                right.map(|e| e.to_string())
            ))
        }
    })
}

/// Refining both arguments refines the composition, and can only make it
/// undefined, never defined.
pub fn ctrans_monotonicity_fuzz(trials: usize, seed: u64) -> LawReport {
    run_law("monotonicity", trials, seed, |rng| {
        let shape = random_shape(rng, 1);
        let [w1, w2, _] = random_chain(rng, &shape);
        let (p1, p2) = (refine(&w1, rng), refine(&w2, rng));
        match (ctrans(&p1, &p2), ctrans(&w1, &w2)) {
            (Some(p), Some(w)) if p.precise_in(&w) => Ok(true),
            (Some(p), Some(w)) => Err(format!("{} ∘ {} = {} is not below {}", p1, p2, p, w)),
            (Some(p), None) => Err(format!("{} ∘ {} = {} but the less precise pair fails", p1, p2, p)),
            (None, _) => Ok(false),
        }
    })
}
