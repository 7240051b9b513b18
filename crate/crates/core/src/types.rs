//! Sensitivity types, evidence and the type-level meta-functions.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::Arc;

use crate::sens::{GradualSens, ResourceVar, SensEnv};

static NEXT_REC_ID: AtomicU64 = AtomicU64::new(1);

/// A recursive type variable.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RecVar {
    name: Arc<str>,
    id: u64,
}

impl RecVar {
    pub fn named(name: &str) -> RecVar {
        RecVar { name: Arc::from(name), id: 0 }
    }

    pub fn fresh(name: &str) -> RecVar {
        RecVar { name: Arc::from(name), id: NEXT_REC_ID.fetch_add(1, AtomicOrdering::Relaxed) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for RecVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.id == 0 {
            write!(f, "{}", self.name)
        } else {
            write!(f, "{}#{}", self.name, self.id)
        }
    }
}

impl fmt::Display for RecVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Type {
    Real,
    Bool,
    Unit,
    Arrow(SType, SType),
    Forall(ResourceVar, SType),
    Prod(SType, SType),
    Sum(SType, SType),
    Rec(RecVar, SType),
    List(SType),
}

/// A type-and-effect `⟨ty;Σ⟩`, or a bound recursive variable.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum SType {
    Eff(Arc<Type>, SensEnv),
    Var(RecVar),
}

/// A pair of types justifying a consistent subtyping judgment.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Evidence {
    pub lhs: SType,
    pub rhs: SType,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Polarity {
    Pos,
    Neg,
}

impl Polarity {
    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Pos => Polarity::Neg,
            Polarity::Neg => Polarity::Pos,
        }
    }
}

impl SType {
    pub fn new(ty: Type, eff: SensEnv) -> SType {
        SType::Eff(Arc::new(ty), eff)
    }

    pub fn pure(ty: Type) -> SType {
        SType::new(ty, SensEnv::empty())
    }

    pub fn real(eff: SensEnv) -> SType {
        SType::new(Type::Real, eff)
    }

    pub fn bool(eff: SensEnv) -> SType {
        SType::new(Type::Bool, eff)
    }

    pub fn unit() -> SType {
        SType::pure(Type::Unit)
    }

    pub fn arrow(dom: SType, cod: SType, eff: SensEnv) -> SType {
        SType::new(Type::Arrow(dom, cod), eff)
    }

    pub fn ty(&self) -> Option<&Type> {
        match self {
            SType::Eff(t, _) => Some(t),
            SType::Var(_) => None,
        }
    }

    /// Top-level effect; recursive variables carry none.
    pub fn eff(&self) -> SensEnv {
        match self {
            SType::Eff(_, e) => e.clone(),
            SType::Var(_) => SensEnv::empty(),
        }
    }

    pub fn eff_ref(&self) -> Option<&SensEnv> {
        match self {
            SType::Eff(_, e) => Some(e),
            SType::Var(_) => None,
        }
    }

    pub fn with_eff(&self, eff: SensEnv) -> SType {
        match self {
            SType::Eff(t, _) => SType::Eff(t.clone(), eff),
            SType::Var(_) => self.clone(),
        }
    }

    /// `G + Σ`.
    pub fn plus(&self, extra: &SensEnv) -> SType {
        match self {
            SType::Eff(t, e) if !extra.is_empty() => SType::Eff(t.clone(), e.add(extra)),
            _ => self.clone(),
        }
    }

    /// `G ⊔ Σ`.
    pub fn join_eff(&self, extra: &SensEnv) -> SType {
        match self {
            SType::Eff(t, e) if !extra.is_empty() => SType::Eff(t.clone(), e.join(extra)),
            _ => self.clone(),
        }
    }

    pub fn is_base(&self) -> bool {
        matches!(self.ty(), Some(Type::Real | Type::Bool | Type::Unit))
    }

    // ---- projections ------------------------------------------------------

    pub fn dom(&self) -> Option<SType> {
        match self.ty()? {
            Type::Arrow(d, _) => Some(d.clone()),
            _ => None,
        }
    }

    pub fn cod(&self) -> Option<SType> {
        match self.ty()? {
            Type::Arrow(_, c) => Some(c.plus(&self.eff())),
            _ => None,
        }
    }

    pub fn inst(&self, s: &SensEnv) -> Option<SType> {
        match self.ty()? {
            Type::Forall(r, body) => Some(body.subst_res(r, s).plus(&self.eff())),
            _ => None,
        }
    }

    pub fn first(&self) -> Option<SType> {
        match self.ty()? {
            Type::Prod(a, _) => Some(a.plus(&self.eff())),
            _ => None,
        }
    }

    pub fn second(&self) -> Option<SType> {
        match self.ty()? {
            Type::Prod(_, b) => Some(b.plus(&self.eff())),
            _ => None,
        }
    }

    pub fn left(&self) -> Option<SType> {
        match self.ty()? {
            Type::Sum(a, _) => Some(a.plus(&self.eff())),
            _ => None,
        }
    }

    pub fn right(&self) -> Option<SType> {
        match self.ty()? {
            Type::Sum(_, b) => Some(b.plus(&self.eff())),
            _ => None,
        }
    }

    /// `unf(⟨μα.G;Σ⟩) = [⟨μα.G;∅⟩/α]G + Σ`.
    pub fn unf(&self) -> Option<SType> {
        match self.ty()? {
            Type::Rec(a, body) => {
                let me = self.with_eff(SensEnv::empty());
                Some(body.subst_rec(a, &me).plus(&self.eff()))
            }
            _ => None,
        }
    }

    /// Element type of a list, charged with the list's own effect.
    pub fn elem(&self) -> Option<SType> {
        match self.ty()? {
            Type::List(g) => Some(g.plus(&self.eff())),
            _ => None,
        }
    }

    // ---- binders and substitution -----------------------------------------

    pub fn free_resources(&self) -> BTreeSet<ResourceVar> {
        let mut out = BTreeSet::new();
        self.collect_free_resources(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free_resources(&self, bound: &mut Vec<ResourceVar>, out: &mut BTreeSet<ResourceVar>) {
        let SType::Eff(t, e) = self else { return };
        for r in e.resources() {
            if !bound.contains(r) {
                out.insert(r.clone());
            }
        }
        match &**t {
            Type::Real | Type::Bool | Type::Unit => {}
            Type::Arrow(a, b) | Type::Prod(a, b) | Type::Sum(a, b) => {
                a.collect_free_resources(bound, out);
                b.collect_free_resources(bound, out);
            }
            Type::Forall(r, b) => {
                bound.push(r.clone());
                b.collect_free_resources(bound, out);
                bound.pop();
            }
            Type::Rec(_, b) | Type::List(b) => b.collect_free_resources(bound, out),
        }
    }

    pub fn has_free_resource(&self, r: &ResourceVar) -> bool {
        self.free_resources().contains(r)
    }

    pub fn free_recvars(&self) -> BTreeSet<RecVar> {
        fn go(g: &SType, bound: &mut Vec<RecVar>, out: &mut BTreeSet<RecVar>) {
            match g {
                SType::Var(a) => {
                    if !bound.contains(a) {
                        out.insert(a.clone());
                    }
                }
                SType::Eff(t, _) => match &**t {
                    Type::Real | Type::Bool | Type::Unit => {}
                    Type::Arrow(a, b) | Type::Prod(a, b) | Type::Sum(a, b) => {
                        go(a, bound, out);
                        go(b, bound, out);
                    }
                    Type::Forall(_, b) | Type::List(b) => go(b, bound, out),
                    Type::Rec(a, b) => {
                        bound.push(a.clone());
                        go(b, bound, out);
                        bound.pop();
                    }
                },
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// `[Σ/r]G`, capture-avoiding.
    pub fn subst_res(&self, r: &ResourceVar, s: &SensEnv) -> SType {
        self.subst_res_map(&[(r.clone(), s.clone())])
    }

    /// Simultaneous capture-avoiding substitution of resources.
    pub fn subst_res_map(&self, map: &[(ResourceVar, SensEnv)]) -> SType {
        if map.is_empty() {
            return self.clone();
        }
        let SType::Eff(t, e) = self else { return self.clone() };
        let eff = e.subst_many(map);
        let ty = match &**t {
            Type::Real | Type::Bool | Type::Unit => t.clone(),
            Type::Arrow(a, b) => Arc::new(Type::Arrow(a.subst_res_map(map), b.subst_res_map(map))),
            Type::Prod(a, b) => Arc::new(Type::Prod(a.subst_res_map(map), b.subst_res_map(map))),
            Type::Sum(a, b) => Arc::new(Type::Sum(a.subst_res_map(map), b.subst_res_map(map))),
            Type::Rec(a, b) => Arc::new(Type::Rec(a.clone(), b.subst_res_map(map))),
            Type::List(b) => Arc::new(Type::List(b.subst_res_map(map))),
            Type::Forall(q, b) => {
                let inner: Vec<_> = map.iter().filter(|(k, _)| k != q).cloned().collect();
                let captures = inner.iter().any(|(_, repl)| repl.contains(q));
                if captures {
                    let q2 = q.refresh();
                    let b2 = b.subst_res(q, &SensEnv::unit(q2.clone()));
                    Arc::new(Type::Forall(q2, b2.subst_res_map(&inner)))
                } else {
                    Arc::new(Type::Forall(q.clone(), b.subst_res_map(&inner)))
                }
            }
        };
        SType::Eff(ty, eff)
    }

    pub fn rename_res(&self, from: &ResourceVar, to: &ResourceVar) -> SType {
        if from == to {
            return self.clone();
        }
        self.subst_res(from, &SensEnv::unit(to.clone()))
    }

    /// `[G/α]self`, capture-avoiding.
    pub fn subst_rec(&self, a: &RecVar, repl: &SType) -> SType {
        match self {
            SType::Var(b) if b == a => repl.clone(),
            SType::Var(_) => self.clone(),
            SType::Eff(t, e) => {
                let ty = match &**t {
                    Type::Real | Type::Bool | Type::Unit => return self.clone(),
                    Type::Arrow(x, y) => Type::Arrow(x.subst_rec(a, repl), y.subst_rec(a, repl)),
                    Type::Prod(x, y) => Type::Prod(x.subst_rec(a, repl), y.subst_rec(a, repl)),
                    Type::Sum(x, y) => Type::Sum(x.subst_rec(a, repl), y.subst_rec(a, repl)),
                    Type::List(x) => Type::List(x.subst_rec(a, repl)),
                    Type::Forall(q, b) => {
                        if repl.has_free_resource(q) {
                            let q2 = q.refresh();
                            Type::Forall(q2.clone(), b.rename_res(q, &q2).subst_rec(a, repl))
                        } else {
                            Type::Forall(q.clone(), b.subst_rec(a, repl))
                        }
                    }
                    Type::Rec(b, body) => {
                        if b == a {
                            return self.clone();
                        }
                        if repl.free_recvars().contains(b) {
                            let b2 = RecVar::fresh(b.name());
                            let body2 = body.subst_rec(b, &SType::Var(b2.clone()));
                            Type::Rec(b2, body2.subst_rec(a, repl))
                        } else {
                            Type::Rec(b.clone(), body.subst_rec(a, repl))
                        }
                    }
                };
                SType::Eff(Arc::new(ty), e.clone())
            }
        }
    }

    /// Structural equality up to renaming of bound resources and recursive variables.
    pub fn alpha_eq(&self, other: &SType) -> bool {
        self.precise_in(other) && other.precise_in(self)
    }

    // ---- relations --------------------------------------------------------

    /// Precision `self ⊑ other`, covariant everywhere.
    pub fn precise_in(&self, other: &SType) -> bool {
        relate(self, other, &mut |a: &SensEnv, b: &SensEnv, _| a.precise_in(b), Polarity::Pos, false)
    }

    /// Consistent subtyping `self ≲ other`.
    pub fn consistent_sub(&self, other: &SType) -> bool {
        relate(
            self,
            other,
            &mut |a: &SensEnv, b: &SensEnv, p| match p {
                Polarity::Pos => a.cleq(b),
                Polarity::Neg => b.cleq(a),
            },
            Polarity::Pos,
            true,
        )
    }

    /// Plausible equality: consistent subtyping in both directions.
    pub fn plausibly_equal(&self, other: &SType) -> bool {
        self.consistent_sub(other) && other.consistent_sub(self)
    }

    /// Does every occurrence of `a` appear at polarity `pol`?
    pub fn occurs_only_at(&self, a: &RecVar, pol: Polarity) -> bool {
        match self {
            SType::Var(b) => b != a || pol == Polarity::Pos,
            SType::Eff(t, _) => match &**t {
                Type::Real | Type::Bool | Type::Unit => true,
                Type::Arrow(x, y) => x.occurs_only_at(a, pol.flip()) && y.occurs_only_at(a, pol),
                Type::Prod(x, y) | Type::Sum(x, y) => x.occurs_only_at(a, pol) && y.occurs_only_at(a, pol),
                Type::Forall(_, b) | Type::List(b) => b.occurs_only_at(a, pol),
                Type::Rec(b, body) => b == a || body.occurs_only_at(a, pol),
            },
        }
    }
}

/// True iff `a` occurs only at polarity `pol` in both types, polarity flipping
/// at arrow domains.
pub fn weakly_positive(a: &RecVar, pol: Polarity, g1: &SType, g2: &SType) -> bool {
    let want = |g: &SType| match pol {
        Polarity::Pos => g.occurs_only_at(a, Polarity::Pos),
        Polarity::Neg => g.occurs_only_at(a, Polarity::Neg),
    };
    want(g1) && want(g2)
}

/// Picks a common name for two binders: the first one when it does not capture
/// anything in the second body, otherwise a fresh one.
fn common_res_binder(r1: &ResourceVar, rest: &[(&ResourceVar, &SType)]) -> ResourceVar {
    if rest.iter().all(|(r, b)| *r == r1 || !b.has_free_resource(r1)) {
        r1.clone()
    } else {
        r1.refresh()
    }
}

fn common_rec_binder(a1: &RecVar, rest: &[(&RecVar, &SType)]) -> RecVar {
    if rest.iter().all(|(a, b)| *a == a1 || !b.free_recvars().contains(a1)) {
        a1.clone()
    } else {
        RecVar::fresh(a1.name())
    }
}

fn rename_rec(body: &SType, from: &RecVar, to: &RecVar) -> SType {
    if from == to {
        body.clone()
    } else {
        body.subst_rec(from, &SType::Var(to.clone()))
    }
}

/// Generic structural relation. `eff` compares effects at the given polarity;
/// `recursive` enables the weakly-positive rule selection on μ-types.
fn relate<F>(g1: &SType, g2: &SType, eff: &mut F, pol: Polarity, recursive: bool) -> bool
where
    F: FnMut(&SensEnv, &SensEnv, Polarity) -> bool,
{
    match (g1, g2) {
        (SType::Var(a), SType::Var(b)) => a == b,
        (SType::Eff(t1, e1), SType::Eff(t2, e2)) => {
            if !eff(e1, e2, pol) {
                return false;
            }
            match (&**t1, &**t2) {
                (Type::Real, Type::Real) | (Type::Bool, Type::Bool) | (Type::Unit, Type::Unit) => true,
                (Type::Arrow(d1, c1), Type::Arrow(d2, c2)) => {
                    let dom_ok = if recursive {
                        relate(d1, d2, eff, pol.flip(), recursive)
                    } else {
                        relate(d1, d2, eff, pol, recursive)
                    };
                    dom_ok && relate(c1, c2, eff, pol, recursive)
                }
                (Type::Prod(a1, b1), Type::Prod(a2, b2)) | (Type::Sum(a1, b1), Type::Sum(a2, b2)) => {
                    relate(a1, a2, eff, pol, recursive) && relate(b1, b2, eff, pol, recursive)
                }
                (Type::List(a1), Type::List(a2)) => relate(a1, a2, eff, pol, recursive),
                (Type::Forall(r1, b1), Type::Forall(r2, b2)) => {
                    let r = common_res_binder(r1, &[(r2, b2)]);
                    relate(&b1.rename_res(r1, &r), &b2.rename_res(r2, &r), eff, pol, recursive)
                }
                (Type::Rec(a1, b1), Type::Rec(a2, b2)) => {
                    let a = common_rec_binder(a1, &[(a2, b2)]);
                    let (b1, b2) = (rename_rec(b1, a1, &a), rename_rec(b2, a2, &a));
                    if !recursive || weakly_positive(&a, Polarity::Pos, &b1, &b2) {
                        relate(&b1, &b2, eff, pol, recursive)
                    } else {
                        relate(&b1, &b2, eff, pol, recursive) && relate(&b2, &b1, eff, pol, recursive)
                    }
                }
                _ => false,
            }
        }
        _ => false,
    }
}

// ---- interior and consistent transitivity -----------------------------------

/// Interior on a single pair of gradual sensitivities.
pub fn interior_sens(g1: GradualSens, g2: GradualSens) -> Option<(GradualSens, GradualSens)> {
    let (s1, s2, s3, s4) = (g1.lo(), g1.hi(), g2.lo(), g2.hi());
    let left = GradualSens::new(s1, s2.min(s4))?;
    let right = GradualSens::new(s1.max(s3), s4)?;
    Some((left, right))
}

/// Consistent transitivity on sensitivity evidence.
pub fn ctrans_sens(
    e1: (GradualSens, GradualSens),
    e2: (GradualSens, GradualSens),
) -> Option<(GradualSens, GradualSens)> {
    let (s11, s12, s13, s14) = (e1.0.lo(), e1.0.hi(), e1.1.lo(), e1.1.hi());
    let (s21, s22, s23, s24) = (e2.0.lo(), e2.0.hi(), e2.1.lo(), e2.1.hi());
    let left = GradualSens::new(s11, s12.min(s14).min(s22))?;
    let right = GradualSens::new(s13.max(s21).max(s23), s24)?;
    Some((left, right))
}

fn interior_env(e1: &SensEnv, e2: &SensEnv) -> Option<(SensEnv, SensEnv)> {
    e1.zip_with(e2, interior_sens)
}

/// `I(G1, G2)`; `None` when the judgment `G1 ≲ G2` is implausible.
pub fn interior(g1: &SType, g2: &SType) -> Option<Evidence> {
    let (lhs, rhs) = interior_pair(g1, g2)?;
    Some(Evidence { lhs, rhs })
}

fn interior_pair(g1: &SType, g2: &SType) -> Option<(SType, SType)> {
    match (g1, g2) {
        (SType::Var(a), SType::Var(b)) if a == b => Some((g1.clone(), g2.clone())),
        (SType::Eff(t1, e1), SType::Eff(t2, e2)) => {
            let (l_eff, r_eff) = interior_env(e1, e2)?;
            let (lt, rt) = match (&**t1, &**t2) {
                (Type::Real, Type::Real) | (Type::Bool, Type::Bool) | (Type::Unit, Type::Unit) => {
                    (t1.clone(), t2.clone())
                }
                (Type::Arrow(d1, c1), Type::Arrow(d2, c2)) => {
                    let (d2i, d1i) = interior_pair(d2, d1)?;
                    let (c1i, c2i) = interior_pair(c1, c2)?;
                    (Arc::new(Type::Arrow(d1i, c1i)), Arc::new(Type::Arrow(d2i, c2i)))
                }
                (Type::Prod(a1, b1), Type::Prod(a2, b2)) => {
                    let (a1i, a2i) = interior_pair(a1, a2)?;
                    let (b1i, b2i) = interior_pair(b1, b2)?;
                    (Arc::new(Type::Prod(a1i, b1i)), Arc::new(Type::Prod(a2i, b2i)))
                }
                (Type::Sum(a1, b1), Type::Sum(a2, b2)) => {
                    let (a1i, a2i) = interior_pair(a1, a2)?;
                    let (b1i, b2i) = interior_pair(b1, b2)?;
                    (Arc::new(Type::Sum(a1i, b1i)), Arc::new(Type::Sum(a2i, b2i)))
                }
                (Type::List(a1), Type::List(a2)) => {
                    let (a1i, a2i) = interior_pair(a1, a2)?;
                    (Arc::new(Type::List(a1i)), Arc::new(Type::List(a2i)))
                }
                (Type::Forall(r1, b1), Type::Forall(r2, b2)) => {
                    let r = common_res_binder(r1, &[(r2, b2)]);
                    let (x, y) = interior_pair(&b1.rename_res(r1, &r), &b2.rename_res(r2, &r))?;
                    (Arc::new(Type::Forall(r.clone(), x)), Arc::new(Type::Forall(r, y)))
                }
                (Type::Rec(a1, b1), Type::Rec(a2, b2)) => {
                    let a = common_rec_binder(a1, &[(a2, b2)]);
                    let (b1, b2) = (rename_rec(b1, a1, &a), rename_rec(b2, a2, &a));
                    if !weakly_positive(&a, Polarity::Pos, &b1, &b2) {
                        // Reflexive rule: the bodies must be plausibly equal.
                        interior_pair(&b2, &b1)?;
                    }
                    let (x, y) = interior_pair(&b1, &b2)?;
                    (Arc::new(Type::Rec(a.clone(), x)), Arc::new(Type::Rec(a, y)))
                }
                _ => return None,
            };
            Some((SType::Eff(lt, l_eff), SType::Eff(rt, r_eff)))
        }
        _ => None,
    }
}

/// Consistent transitivity `ε1 ∘ ε2`; `None` signals a refuted judgment.
pub fn ctrans(e1: &Evidence, e2: &Evidence) -> Option<Evidence> {
    let (lhs, rhs) = ctrans4(&e1.lhs, &e1.rhs, &e2.lhs, &e2.rhs)?;
    Some(Evidence { lhs, rhs })
}

fn ctrans4(a1: &SType, a2: &SType, b1: &SType, b2: &SType) -> Option<(SType, SType)> {
    match (a1, a2, b1, b2) {
        (SType::Var(w), SType::Var(x), SType::Var(y), SType::Var(z)) if w == x && x == y && y == z => {
            Some((a1.clone(), b2.clone()))
        }
        (SType::Eff(t1, e1), SType::Eff(t2, e2), SType::Eff(t3, e3), SType::Eff(t4, e4)) => {
            let (l_eff, r_eff) =
                SensEnv::zip4_with([e1, e2, e3, e4], |[g1, g2, g3, g4]| ctrans_sens((g1, g2), (g3, g4)))?;
            let (lt, rt) = match (&**t1, &**t2, &**t3, &**t4) {
                (Type::Real, Type::Real, Type::Real, Type::Real)
                | (Type::Bool, Type::Bool, Type::Bool, Type::Bool)
                | (Type::Unit, Type::Unit, Type::Unit, Type::Unit) => (t1.clone(), t4.clone()),
                (Type::Arrow(d1, c1), Type::Arrow(d2, c2), Type::Arrow(d3, c3), Type::Arrow(d4, c4)) => {
                    // Domain evidence runs the other way: ⟨d4,d3⟩ ∘ ⟨d2,d1⟩.
                    let (dr, dl) = ctrans4(d4, d3, d2, d1)?;
                    let (cl, cr) = ctrans4(c1, c2, c3, c4)?;
                    (Arc::new(Type::Arrow(dl, cl)), Arc::new(Type::Arrow(dr, cr)))
                }
                (Type::Prod(x1, y1), Type::Prod(x2, y2), Type::Prod(x3, y3), Type::Prod(x4, y4)) => {
                    let (xl, xr) = ctrans4(x1, x2, x3, x4)?;
                    let (yl, yr) = ctrans4(y1, y2, y3, y4)?;
                    (Arc::new(Type::Prod(xl, yl)), Arc::new(Type::Prod(xr, yr)))
                }
                (Type::Sum(x1, y1), Type::Sum(x2, y2), Type::Sum(x3, y3), Type::Sum(x4, y4)) => {
                    let (xl, xr) = ctrans4(x1, x2, x3, x4)?;
                    let (yl, yr) = ctrans4(y1, y2, y3, y4)?;
                    (Arc::new(Type::Sum(xl, yl)), Arc::new(Type::Sum(xr, yr)))
                }
                (Type::List(x1), Type::List(x2), Type::List(x3), Type::List(x4)) => {
                    let (l, r) = ctrans4(x1, x2, x3, x4)?;
                    (Arc::new(Type::List(l)), Arc::new(Type::List(r)))
                }
                (Type::Forall(r1, x1), Type::Forall(r2, x2), Type::Forall(r3, x3), Type::Forall(r4, x4)) => {
                    let r = common_res_binder(r1, &[(r2, x2), (r3, x3), (r4, x4)]);
                    let (l, rr) = ctrans4(
                        &x1.rename_res(r1, &r),
                        &x2.rename_res(r2, &r),
                        &x3.rename_res(r3, &r),
                        &x4.rename_res(r4, &r),
                    )?;
                    (Arc::new(Type::Forall(r.clone(), l)), Arc::new(Type::Forall(r, rr)))
                }
                (Type::Rec(a1, x1), Type::Rec(a2, x2), Type::Rec(a3, x3), Type::Rec(a4, x4)) => {
                    let a = common_rec_binder(a1, &[(a2, x2), (a3, x3), (a4, x4)]);
                    let (l, r) = ctrans4(
                        &rename_rec(x1, a1, &a),
                        &rename_rec(x2, a2, &a),
                        &rename_rec(x3, a3, &a),
                        &rename_rec(x4, a4, &a),
                    )?;
                    (Arc::new(Type::Rec(a.clone(), l)), Arc::new(Type::Rec(a, r)))
                }
                _ => return None,
            };
            Some((SType::Eff(lt, l_eff), SType::Eff(rt, r_eff)))
        }
        _ => None,
    }
}

// ---- join / meet ------------------------------------------------------------

/// `G1 ⋎ G2`: least upper bound under subtyping. Effects join in covariant
/// positions and meet in arrow domains.
pub fn stype_join(g1: &SType, g2: &SType) -> Option<SType> {
    lub(g1, g2, Polarity::Pos)
}

/// Greatest lower bound, the dual of [`stype_join`].
pub fn stype_meet(g1: &SType, g2: &SType) -> Option<SType> {
    lub(g1, g2, Polarity::Neg)
}

fn lub(g1: &SType, g2: &SType, pol: Polarity) -> Option<SType> {
    match (g1, g2) {
        (SType::Var(a), SType::Var(b)) if a == b => Some(g1.clone()),
        (SType::Eff(t1, e1), SType::Eff(t2, e2)) => {
            let eff = match pol {
                Polarity::Pos => e1.join(e2),
                Polarity::Neg => e1.min(e2),
            };
            let ty = match (&**t1, &**t2) {
                (Type::Real, Type::Real) | (Type::Bool, Type::Bool) | (Type::Unit, Type::Unit) => t1.clone(),
                (Type::Arrow(d1, c1), Type::Arrow(d2, c2)) => {
                    Arc::new(Type::Arrow(lub(d1, d2, pol.flip())?, lub(c1, c2, pol)?))
                }
                (Type::Prod(a1, b1), Type::Prod(a2, b2)) => Arc::new(Type::Prod(lub(a1, a2, pol)?, lub(b1, b2, pol)?)),
                (Type::Sum(a1, b1), Type::Sum(a2, b2)) => Arc::new(Type::Sum(lub(a1, a2, pol)?, lub(b1, b2, pol)?)),
                (Type::List(a1), Type::List(a2)) => Arc::new(Type::List(lub(a1, a2, pol)?)),
                (Type::Forall(r1, b1), Type::Forall(r2, b2)) => {
                    let r = common_res_binder(r1, &[(r2, b2)]);
                    Arc::new(Type::Forall(r.clone(), lub(&b1.rename_res(r1, &r), &b2.rename_res(r2, &r), pol)?))
                }
                (Type::Rec(a1, b1), Type::Rec(a2, b2)) => {
                    let a = common_rec_binder(a1, &[(a2, b2)]);
                    let (b1, b2) = (rename_rec(b1, a1, &a), rename_rec(b2, a2, &a));
                    if !weakly_positive(&a, Polarity::Pos, &b1, &b2) && !b1.alpha_eq(&b2) {
                        return None;
                    }
                    Arc::new(Type::Rec(a, lub(&b1, &b2, pol)?))
                }
                _ => return None,
            };
            Some(SType::Eff(ty, eff))
        }
        _ => None,
    }
}

// ---- evidence ---------------------------------------------------------------

impl Evidence {
    pub fn new(lhs: SType, rhs: SType) -> Evidence {
        Evidence { lhs, rhs }
    }

    /// `I(G, G)`.
    pub fn refl(g: &SType) -> Evidence {
        interior(g, g).expect("interior of a type with itself is always defined")
    }

    pub fn precise_in(&self, other: &Evidence) -> bool {
        self.lhs.precise_in(&other.lhs) && self.rhs.precise_in(&other.rhs)
    }

    pub fn alpha_eq(&self, other: &Evidence) -> bool {
        self.lhs.alpha_eq(&other.lhs) && self.rhs.alpha_eq(&other.rhs)
    }

    pub fn i_dom(&self) -> Option<Evidence> {
        Some(Evidence { lhs: self.rhs.dom()?, rhs: self.lhs.dom()? })
    }

    pub fn i_cod(&self) -> Option<Evidence> {
        Some(Evidence { lhs: self.lhs.cod()?, rhs: self.rhs.cod()? })
    }

    pub fn i_inst(&self, s: &SensEnv) -> Option<Evidence> {
        Some(Evidence { lhs: self.lhs.inst(s)?, rhs: self.rhs.inst(s)? })
    }

    pub fn i_first(&self) -> Option<Evidence> {
        Some(Evidence { lhs: self.lhs.first()?, rhs: self.rhs.first()? })
    }

    pub fn i_second(&self) -> Option<Evidence> {
        Some(Evidence { lhs: self.lhs.second()?, rhs: self.rhs.second()? })
    }

    pub fn i_left(&self) -> Option<Evidence> {
        Some(Evidence { lhs: self.lhs.left()?, rhs: self.rhs.left()? })
    }

    pub fn i_right(&self) -> Option<Evidence> {
        Some(Evidence { lhs: self.lhs.right()?, rhs: self.rhs.right()? })
    }

    pub fn i_unf(&self) -> Option<Evidence> {
        Some(Evidence { lhs: self.lhs.unf()?, rhs: self.rhs.unf()? })
    }

    pub fn i_elem(&self) -> Option<Evidence> {
        Some(Evidence { lhs: self.lhs.elem()?, rhs: self.rhs.elem()? })
    }

    /// `eff²(ε)`.
    pub fn eff2(&self) -> (SensEnv, SensEnv) {
        (self.lhs.eff(), self.rhs.eff())
    }

    /// `ε ⊔² (Σ1, Σ2)`.
    pub fn join_eff2(&self, effs: &(SensEnv, SensEnv)) -> Evidence {
        Evidence { lhs: self.lhs.join_eff(&effs.0), rhs: self.rhs.join_eff(&effs.1) }
    }

    /// `ε +² (Σ1, Σ2)`.
    pub fn plus_eff2(&self, effs: &(SensEnv, SensEnv)) -> Evidence {
        Evidence { lhs: self.lhs.plus(&effs.0), rhs: self.rhs.plus(&effs.1) }
    }

    pub fn subst_res_map(&self, map: &[(ResourceVar, SensEnv)]) -> Evidence {
        Evidence { lhs: self.lhs.subst_res_map(map), rhs: self.rhs.subst_res_map(map) }
    }
}

// ---- printing ---------------------------------------------------------------

impl fmt::Display for SType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_stype(self, 0, f)
    }
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨{}, {}⟩", self.lhs, self.rhs)
    }
}

// Levels: 0 arrow/binders, 1 sum, 2 product, 3 atom.
fn type_level(t: &Type) -> u8 {
    match t {
        Type::Arrow(..) | Type::Forall(..) | Type::Rec(..) => 0,
        Type::Sum(..) => 1,
        Type::Prod(..) => 2,
        Type::Real | Type::Bool | Type::Unit | Type::List(_) => 3,
    }
}

fn write_stype(g: &SType, level: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match g {
        SType::Var(a) => write!(f, "{}", a),
        SType::Eff(t, e) => {
            let atomic = type_level(t) == 3;
            if e.is_empty() {
                if type_level(t) < level {
                    write!(f, "(")?;
                    write_type(t, f)?;
                    write!(f, ")")
                } else {
                    write_type(t, f)
                }
            } else if atomic {
                write_type(t, f)?;
                write!(f, "[{}]", e)
            } else {
                write!(f, "(")?;
                write_type(t, f)?;
                write!(f, ")[{}]", e)
            }
        }
    }
}

fn write_type(t: &Type, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Type::Real => write!(f, "Number"),
        Type::Bool => write!(f, "Boolean"),
        Type::Unit => write!(f, "Unit"),
        Type::List(g) => {
            write!(f, "List<")?;
            write_stype(g, 0, f)?;
            write!(f, ">")
        }
        Type::Arrow(a, b) => {
            write_stype(a, 1, f)?;
            write!(f, " -> ")?;
            write_stype(b, 0, f)
        }
        Type::Sum(a, b) => {
            write_stype(a, 1, f)?;
            write!(f, " + ")?;
            write_stype(b, 2, f)
        }
        Type::Prod(a, b) => {
            write_stype(a, 2, f)?;
            write!(f, " * ")?;
            write_stype(b, 3, f)
        }
        Type::Forall(r, b) => {
            write!(f, "forall {}. ", r)?;
            write_stype(b, 0, f)
        }
        Type::Rec(a, b) => {
            write!(f, "mu {}. ", a)?;
            write_stype(b, 0, f)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sens::Sens;

    fn g(lo: f64, hi: f64) -> GradualSens {
        GradualSens::from_f64(lo, hi).unwrap()
    }

    fn r(n: &str) -> ResourceVar {
        ResourceVar::named(n)
    }

    fn real(entries: &[(&str, GradualSens)]) -> SType {
        SType::real(SensEnv::from_entries(entries.iter().map(|(n, s)| (r(n), *s))))
    }

    fn ex(s: f64) -> GradualSens {
        GradualSens::exact(Sens::new(s).unwrap())
    }

    const INF: f64 = f64::INFINITY;

    #[test]
    fn precision_examples() {
        let a = SType::arrow(real(&[("r", g(5.0, 10.0))]), real(&[("r", ex(10.0))]), SensEnv::empty());
        let b = SType::arrow(real(&[("r", g(0.0, 10.0))]), real(&[("r", g(5.0, 15.0))]), SensEnv::empty());
        assert!(a.precise_in(&b));
        assert!(a.precise_in(&a));
        assert!(!real(&[("r", ex(1.0))]).precise_in(&SType::bool(SensEnv::unit(r("r")))));
    }

    #[test]
    fn consistent_subtyping_examples() {
        let a = SType::arrow(real(&[("r1", GradualSens::UNKNOWN)]), real(&[("r2", ex(10.0))]), SensEnv::empty());
        let b = SType::arrow(real(&[("r1", ex(5.0))]), real(&[("r2", GradualSens::UNKNOWN)]), SensEnv::empty());
        assert!(a.consistent_sub(&b));
        let two = real(&[("r", ex(2.0))]);
        let q = real(&[("r", GradualSens::UNKNOWN)]);
        let one = real(&[("r", ex(1.0))]);
        assert!(two.consistent_sub(&q));
        assert!(q.consistent_sub(&one));
        assert!(!two.consistent_sub(&one));
        let a = RecVar::named("a");
        let nat = SType::pure(Type::Rec(a.clone(), SType::pure(Type::Sum(SType::Var(a), SType::unit()))));
        assert!(nat.consistent_sub(&nat));
        assert!(q.plausibly_equal(&real(&[("r", ex(3.0))])));
        assert!(!two.plausibly_equal(&real(&[("r", ex(3.0))])));
    }

    #[test]
    fn interior_examples() {
        let ev = interior(&real(&[("r", GradualSens::UNKNOWN)]), &real(&[("r", ex(10.0))])).unwrap();
        assert_eq!(ev.lhs, real(&[("r", g(0.0, 10.0))]));
        assert_eq!(ev.rhs, real(&[("r", ex(10.0))]));
        let p = real(&[("r", ex(4.0))]);
        assert_eq!(interior(&p, &p), Some(Evidence::new(p.clone(), p.clone())));
        assert!(interior(&real(&[("r", ex(10.0))]), &real(&[("r", ex(5.0))])).is_none());
    }

    #[test]
    fn ctrans_examples() {
        let e = |a: GradualSens, b: GradualSens| Evidence::new(real(&[("r", a)]), real(&[("r", b)]));
        assert_eq!(ctrans(&e(ex(3.0), ex(5.0)), &e(ex(5.0), g(5.0, INF))), Some(e(ex(3.0), g(5.0, INF))));
        assert_eq!(ctrans(&e(ex(3.0), g(5.0, INF)), &e(g(0.0, 4.0), ex(4.0))), None);
        assert_eq!(
            ctrans(&e(g(1.0, 2.0), g(3.0, 4.0)), &e(g(3.0, 4.0), g(5.0, 6.0))),
            Some(e(g(1.0, 2.0), g(5.0, 6.0)))
        );
    }

    #[test]
    fn projections() {
        let g1 = real(&[]);
        let f = SType::arrow(g1.clone(), real(&[("r", ex(2.0))]), SensEnv::unit(r("r")));
        assert_eq!(f.cod(), Some(real(&[("r", ex(3.0))])));
        let rr = r("r");
        let all = SType::pure(Type::Forall(rr.clone(), SType::real(SensEnv::unit(rr))));
        assert_eq!(all.inst(&SensEnv::single(r("r'"), ex(5.0))), Some(real(&[("r'", ex(5.0))])));
        let a = RecVar::named("a");
        let body = SType::pure(Type::Sum(SType::unit(), SType::Var(a.clone())));
        let mu = SType::new(Type::Rec(a, body), SensEnv::unit(r("s")));
        let expect = SType::new(Type::Sum(SType::unit(), mu.with_eff(SensEnv::empty())), SensEnv::unit(r("s")));
        assert_eq!(mu.unf(), Some(expect));
    }

    #[test]
    fn evidence_inversion() {
        let (a, b) = (real(&[("r", ex(1.0))]), real(&[("r", ex(2.0))]));
        let (c, d) = (real(&[("r", ex(3.0))]), real(&[("r", ex(4.0))]));
        let ev = Evidence::new(
            SType::arrow(a.clone(), c.clone(), SensEnv::empty()),
            SType::arrow(b.clone(), d.clone(), SensEnv::empty()),
        );
        assert_eq!(ev.i_dom(), Some(Evidence::new(b, a)));
        assert_eq!(ev.i_cod(), Some(Evidence::new(c, d)));
    }

    #[test]
    fn joins() {
        let z = real(&[]);
        let two = real(&[("r1", ex(2.0)), ("r2", ex(2.0))]);
        assert_eq!(stype_join(&z, &two), Some(two.clone()));
        assert_eq!(stype_join(&two, &two), Some(two.clone()));
        let f1 = SType::arrow(real(&[("r", ex(2.0))]), real(&[("r", ex(1.0))]), SensEnv::empty());
        let f2 = SType::arrow(real(&[("r", ex(4.0))]), real(&[("r", ex(3.0))]), SensEnv::empty());
        let j = SType::arrow(real(&[("r", ex(2.0))]), real(&[("r", ex(3.0))]), SensEnv::empty());
        assert_eq!(stype_join(&f1, &f2), Some(j.clone()));
        assert!(f1.consistent_sub(&j) && f2.consistent_sub(&j));
        assert!(stype_join(&z, &SType::bool(SensEnv::empty())).is_none());
    }

    #[test]
    fn weakly_positive_examples() {
        let a = RecVar::named("a");
        let sum = SType::pure(Type::Sum(SType::unit(), SType::Var(a.clone())));
        assert!(weakly_positive(&a, Polarity::Pos, &sum, &sum));
        let arr = SType::arrow(SType::Var(a.clone()), SType::unit(), SensEnv::empty());
        assert!(!weakly_positive(&a, Polarity::Pos, &arr, &arr));
        assert!(weakly_positive(&a, Polarity::Pos, &SType::unit(), &SType::unit()));
    }

    #[test]
    fn capture_avoiding_inst() {
        // ∀s. ⟨R; r + s⟩ with r := 1s must not capture.
        let (rr, s) = (r("r"), r("s"));
        let body = SType::real(SensEnv::unit(rr.clone()).add(&SensEnv::unit(s.clone())));
        let t = SType::pure(Type::Forall(s.clone(), body));
        let out = t.subst_res(&rr, &SensEnv::unit(s.clone()));
        let Some(Type::Forall(s2, b2)) = out.ty() else { panic!() };
        assert_ne!(s2, &s);
        assert_eq!(b2.eff().get(&s), ex(1.0));
        assert_eq!(b2.eff().get(s2), ex(1.0));
    }

    #[test]
    fn printing() {
        let t = SType::arrow(
            real(&[("r", ex(1.0))]),
            SType::bool(SensEnv::single(r("r"), GradualSens::UNKNOWN)),
            SensEnv::empty(),
        );
        assert_eq!(t.to_string(), "Number[r] -> Boolean[?r]");
        let t2 = SType::arrow(t.clone(), SType::unit(), SensEnv::single(r("x"), ex(2.0)));
        assert_eq!(t2.to_string(), "((Number[r] -> Boolean[?r]) -> Unit)[2x]");
        let p = SType::pure(Type::Prod(SType::pure(Type::Sum(SType::unit(), SType::unit())), real(&[])));
        assert_eq!(p.to_string(), "(Unit + Unit) * Number");
    }
}
