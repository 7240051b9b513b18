//! Sensitivities, gradual sensitivities (intervals) and sensitivity
//! environments (resource polynomials).
//!
//! Bounds are `f64` values that are never NaN. Only `+`, `*`, `min` and
//! `max` are ever applied to them, and `0 * inf` is defined as `0`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::Arc;

/// A static sensitivity: a non-negative extended real.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Sens(f64);

impl Eq for Sens {}

impl Ord for Sens {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.partial_cmp(&other.0).expect("sensitivities are never NaN")
    }
}

impl Sens {
    pub const ZERO: Sens = Sens(0.0);
    pub const ONE: Sens = Sens(1.0);
    pub const INF: Sens = Sens(f64::INFINITY);

    /// Returns `None` for negative values and NaN.
    pub fn new(v: f64) -> Option<Sens> {
        if v.is_nan() || v < 0.0 {
            None
        } else {
            Some(Sens(v))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_inf(self) -> bool {
        self.0.is_infinite()
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }

    pub fn add(self, other: Sens) -> Sens {
        Sens(self.0 + other.0)
    }

    pub fn mul(self, other: Sens) -> Sens {
        if self.is_zero() || other.is_zero() {
            Sens::ZERO
        } else {
            Sens(self.0 * other.0)
        }
    }
}

impl fmt::Display for Sens {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_number(self.0, f)
    }
}

pub(crate) fn fmt_number(v: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if v.is_infinite() {
        if v > 0.0 {
            write!(f, "inf")
        } else {
            write!(f, "-inf")
        }
    } else if v.fract() == 0.0 && v.abs() < 1e15 {
        write!(f, "{}", v as i64)
    } else {
        write!(f, "{}", v)
    }
}

/// A gradual sensitivity: the closed interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GradualSens {
    lo: Sens,
    hi: Sens,
}

impl std::hash::Hash for Sens {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state)
    }
}

/// Binary operators on gradual sensitivities, applied bound-wise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SensOp {
    Add,
    Mul,
    Join,
    Meet,
}

impl GradualSens {
    pub const ZERO: GradualSens = GradualSens { lo: Sens::ZERO, hi: Sens::ZERO };
    pub const UNKNOWN: GradualSens = GradualSens { lo: Sens::ZERO, hi: Sens::INF };

    /// Returns `None` when `lo > hi`.
    pub fn new(lo: Sens, hi: Sens) -> Option<GradualSens> {
        (lo <= hi).then_some(GradualSens { lo, hi })
    }

    pub fn exact(s: Sens) -> GradualSens {
        GradualSens { lo: s, hi: s }
    }

    pub fn from_f64(lo: f64, hi: f64) -> Option<GradualSens> {
        GradualSens::new(Sens::new(lo)?, Sens::new(hi)?)
    }

    pub fn lo(self) -> Sens {
        self.lo
    }

    pub fn hi(self) -> Sens {
        self.hi
    }

    pub fn is_zero(self) -> bool {
        self.lo.is_zero() && self.hi.is_zero()
    }

    pub fn is_static(self) -> bool {
        self.lo == self.hi
    }

    /// `false` iff `inf` is a plausible value of the interval.
    pub fn is_bounded(self) -> bool {
        !self.hi.is_inf()
    }

    pub fn add(self, other: GradualSens) -> GradualSens {
        GradualSens { lo: self.lo.add(other.lo), hi: self.hi.add(other.hi) }
    }

    pub fn mul(self, other: GradualSens) -> GradualSens {
        GradualSens { lo: self.lo.mul(other.lo), hi: self.hi.mul(other.hi) }
    }

    pub fn join(self, other: GradualSens) -> GradualSens {
        GradualSens { lo: self.lo.max(other.lo), hi: self.hi.max(other.hi) }
    }

    /// Intersection; `None` is the empty-interval signal for disjoint intervals.
    pub fn meet(self, other: GradualSens) -> Option<GradualSens> {
        GradualSens::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// Bound-wise minimum, the dual of [`GradualSens::join`].
    pub fn min(self, other: GradualSens) -> GradualSens {
        GradualSens { lo: self.lo.min(other.lo), hi: self.hi.min(other.hi) }
    }

    pub fn apply(op: SensOp, a: GradualSens, b: GradualSens) -> Option<GradualSens> {
        match op {
            SensOp::Add => Some(a.add(b)),
            SensOp::Mul => Some(a.mul(b)),
            SensOp::Join => Some(a.join(b)),
            SensOp::Meet => a.meet(b),
        }
    }

    /// Precision: interval inclusion.
    pub fn precise_in(self, other: GradualSens) -> bool {
        self.lo >= other.lo && self.hi <= other.hi
    }

    /// Consistent ordering `self ≲ other`.
    pub fn cleq(self, other: GradualSens) -> bool {
        self.lo <= other.hi
    }

    /// Consistently-less-than.
    pub fn clt(self, other: GradualSens) -> bool {
        self.lo < other.hi
    }
}

impl fmt::Display for GradualSens {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == GradualSens::UNKNOWN {
            write!(f, "?")
        } else if self.is_static() {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "[{},{}]", self.lo, self.hi)
        }
    }
}

static NEXT_RESOURCE_ID: AtomicU64 = AtomicU64::new(1);

/// A resource (distance) variable. Names are for display; `id`
/// distinguishes binders that share a name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResourceVar {
    name: Arc<str>,
    id: u64,
}

impl ResourceVar {
    /// A user-level resource with the canonical id 0.
    pub fn named(name: &str) -> ResourceVar {
        ResourceVar { name: Arc::from(name), id: 0 }
    }

    /// A resource that compares unequal to every other resource.
    pub fn fresh(name: &str) -> ResourceVar {
        let id = NEXT_RESOURCE_ID.fetch_add(1, AtomicOrdering::Relaxed);
        ResourceVar { name: Arc::from(name), id }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    /// A fresh variable that keeps this variable's display name.
    pub fn refresh(&self) -> ResourceVar {
        ResourceVar::fresh(&self.name)
    }
}

impl fmt::Debug for ResourceVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.id == 0 {
            write!(f, "{}", self.name)
        } else {
            write!(f, "{}#{}", self.name, self.id)
        }
    }
}

impl fmt::Display for ResourceVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// A sensitivity environment in normal form: sorted by resource, with no
/// `[0,0]` entries. Absent resources are 0-sensitive.
#[derive(Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct SensEnv(Vec<(ResourceVar, GradualSens)>);

/// A sensitivity environment whose entries are all fully precise.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct StaticSensEnv(Vec<(ResourceVar, Sens)>);

/// Pointwise merge of two sorted entry lists, `f` sees `None` for absent keys.
fn merge_with<A: Copy, B, F>(
    a: &[(ResourceVar, A)],
    b: &[(ResourceVar, A)],
    mut f: F,
) -> Vec<(ResourceVar, B)>
where
    F: FnMut(Option<A>, Option<A>) -> Option<B>,
{
    let mut out = Vec::with_capacity(a.len().max(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let (key, x, y) = match (a.get(i), b.get(j)) {
            (Some((ka, va)), Some((kb, vb))) => match ka.cmp(kb) {
                Ordering::Less => {
                    i += 1;
                    (ka, Some(*va), None)
                }
                Ordering::Greater => {
                    j += 1;
                    (kb, None, Some(*vb))
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    (ka, Some(*va), Some(*vb))
                }
            },
            (Some((ka, va)), None) => {
                i += 1;
                (ka, Some(*va), None)
            }
            (None, Some((kb, vb))) => {
                j += 1;
                (kb, None, Some(*vb))
            }
            (None, None) => unreachable!(),
        };
        if let Some(v) = f(x, y) {
            out.push((key.clone(), v));
        }
    }
    out
}

fn nonzero(g: GradualSens) -> Option<GradualSens> {
    (!g.is_zero()).then_some(g)
}

impl SensEnv {
    pub fn empty() -> SensEnv {
        SensEnv(Vec::new())
    }

    pub fn single(r: ResourceVar, g: GradualSens) -> SensEnv {
        SensEnv::from_entries([(r, g)])
    }

    /// `1r`.
    pub fn unit(r: ResourceVar) -> SensEnv {
        SensEnv::single(r, GradualSens::exact(Sens::ONE))
    }

    /// Builds a normalized environment; repeated resources are added.
    pub fn from_entries<I: IntoIterator<Item = (ResourceVar, GradualSens)>>(it: I) -> SensEnv {
        it.into_iter()
            .fold(SensEnv::empty(), |acc, (r, g)| acc.add(&SensEnv(if g.is_zero() { vec![] } else { vec![(r, g)] })))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ResourceVar, GradualSens)> {
        self.0.iter().map(|(r, g)| (r, *g))
    }

    pub fn resources(&self) -> impl Iterator<Item = &ResourceVar> {
        self.0.iter().map(|(r, _)| r)
    }

    pub fn get(&self, r: &ResourceVar) -> GradualSens {
        match self.0.binary_search_by(|(k, _)| k.cmp(r)) {
            Ok(i) => self.0[i].1,
            Err(_) => GradualSens::ZERO,
        }
    }

    pub fn contains(&self, r: &ResourceVar) -> bool {
        self.0.binary_search_by(|(k, _)| k.cmp(r)).is_ok()
    }

    pub fn add(&self, other: &SensEnv) -> SensEnv {
        if other.is_empty() {
            return self.clone();
        }
        if self.is_empty() {
            return other.clone();
        }
        SensEnv(merge_with(&self.0, &other.0, |a, b| {
            let z = GradualSens::ZERO;
            nonzero(a.unwrap_or(z).add(b.unwrap_or(z)))
        }))
    }

    pub fn scale(&self, g: GradualSens) -> SensEnv {
        SensEnv(self.0.iter().filter_map(|(r, s)| nonzero(g.mul(*s)).map(|v| (r.clone(), v))).collect())
    }

    pub fn join(&self, other: &SensEnv) -> SensEnv {
        SensEnv(merge_with(&self.0, &other.0, |a, b| {
            let z = GradualSens::ZERO;
            nonzero(a.unwrap_or(z).join(b.unwrap_or(z)))
        }))
    }

    /// Pointwise bound-wise minimum.
    pub fn min(&self, other: &SensEnv) -> SensEnv {
        SensEnv(merge_with(&self.0, &other.0, |a, b| {
            let z = GradualSens::ZERO;
            nonzero(a.unwrap_or(z).min(b.unwrap_or(z)))
        }))
    }

    /// Pointwise intersection; `None` when some entry is empty.
    pub fn meet(&self, other: &SensEnv) -> Option<SensEnv> {
        let mut ok = true;
        let v = merge_with(&self.0, &other.0, |a, b| {
            let z = GradualSens::ZERO;
            match a.unwrap_or(z).meet(b.unwrap_or(z)) {
                Some(g) => nonzero(g),
                None => {
                    ok = false;
                    None
                }
            }
        });
        ok.then_some(SensEnv(v))
    }

    /// `[repl/r]self`: drop `r` and add `self(r) * repl`.
    pub fn subst(&self, r: &ResourceVar, repl: &SensEnv) -> SensEnv {
        let coef = self.get(r);
        if coef.is_zero() {
            return self.clone();
        }
        let rest = SensEnv(self.0.iter().filter(|(k, _)| k != r).cloned().collect());
        rest.add(&repl.scale(coef))
    }

    /// Simultaneous substitution of several resources.
    pub fn subst_many(&self, map: &[(ResourceVar, SensEnv)]) -> SensEnv {
        if map.is_empty() || self.is_empty() {
            return self.clone();
        }
        let mut out = SensEnv::empty();
        for (k, g) in &self.0 {
            match map.iter().find(|(r, _)| r == k) {
                Some((_, repl)) => out = out.add(&repl.scale(*g)),
                None => out = out.add(&SensEnv(vec![(k.clone(), *g)])),
            }
        }
        out
    }

    /// Renames resource `from` to `to`.
    pub fn rename(&self, from: &ResourceVar, to: &ResourceVar) -> SensEnv {
        if !self.contains(from) {
            return self.clone();
        }
        self.subst(from, &SensEnv::unit(to.clone()))
    }

    /// Sum over resources of `self(r) * denv(r)`.
    pub fn dot(&self, denv: &SensEnv) -> GradualSens {
        let mut acc = GradualSens::ZERO;
        for (r, g) in &self.0 {
            acc = acc.add(g.mul(denv.get(r)));
        }
        acc
    }

    pub fn is_bounded(&self) -> bool {
        self.0.iter().all(|(_, g)| g.is_bounded())
    }

    pub fn is_static(&self) -> bool {
        self.0.iter().all(|(_, g)| g.is_static())
    }

    pub fn precise_in(&self, other: &SensEnv) -> bool {
        let mut ok = true;
        merge_with(&self.0, &other.0, |a, b| {
            let z = GradualSens::ZERO;
            ok &= a.unwrap_or(z).precise_in(b.unwrap_or(z));
            None::<()>
        });
        ok
    }

    pub fn cleq(&self, other: &SensEnv) -> bool {
        let mut ok = true;
        merge_with(&self.0, &other.0, |a, b| {
            let z = GradualSens::ZERO;
            ok &= a.unwrap_or(z).cleq(b.unwrap_or(z));
            None::<()>
        });
        ok
    }

    /// Lower bound of every entry.
    pub fn lower(&self) -> StaticSensEnv {
        StaticSensEnv(self.0.iter().filter(|(_, g)| !g.lo().is_zero()).map(|(r, g)| (r.clone(), g.lo())).collect())
    }

    /// Upper bound of every entry.
    pub fn upper(&self) -> StaticSensEnv {
        StaticSensEnv(self.0.iter().map(|(r, g)| (r.clone(), g.hi())).collect())
    }

    /// Applies `f` to every pair of entries over the union of domains.
    pub fn zip_with<F>(&self, other: &SensEnv, mut f: F) -> Option<(SensEnv, SensEnv)>
    where
        F: FnMut(GradualSens, GradualSens) -> Option<(GradualSens, GradualSens)>,
    {
        let z = GradualSens::ZERO;
        let pairs = merge_with(&self.0, &other.0, |a, b| Some((a.unwrap_or(z), b.unwrap_or(z))));
        let mut left = Vec::new();
        let mut right = Vec::new();
        for (r, (a, b)) in pairs {
            let (x, y) = f(a, b)?;
            if !x.is_zero() {
                left.push((r.clone(), x));
            }
            if !y.is_zero() {
                right.push((r, y));
            }
        }
        Some((SensEnv(left), SensEnv(right)))
    }

    /// Like [`SensEnv::zip_with`] for four environments at once.
    pub fn zip4_with<F>(envs: [&SensEnv; 4], mut f: F) -> Option<(SensEnv, SensEnv)>
    where
        F: FnMut([GradualSens; 4]) -> Option<(GradualSens, GradualSens)>,
    {
        let mut keys: Vec<&ResourceVar> = envs.iter().flat_map(|e| e.resources()).collect();
        keys.sort();
        keys.dedup();
        let mut left = Vec::new();
        let mut right = Vec::new();
        for k in keys {
            let (x, y) = f([envs[0].get(k), envs[1].get(k), envs[2].get(k), envs[3].get(k)])?;
            if !x.is_zero() {
                left.push((k.clone(), x));
            }
            if !y.is_zero() {
                right.push((k.clone(), y));
            }
        }
        Some((SensEnv(left), SensEnv(right)))
    }
}

impl fmt::Debug for SensEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for SensEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        for (i, (r, g)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if *g == GradualSens::exact(Sens::ONE) {
                write!(f, "{}", r)?;
            } else if *g == GradualSens::exact(Sens::INF) {
                write!(f, "inf {}", r)?;
            } else {
                write!(f, "{}{}", g, r)?;
            }
        }
        Ok(())
    }
}

impl StaticSensEnv {
    pub fn empty() -> StaticSensEnv {
        StaticSensEnv(Vec::new())
    }

    pub fn from_entries<I: IntoIterator<Item = (ResourceVar, Sens)>>(it: I) -> StaticSensEnv {
        let env = SensEnv::from_entries(it.into_iter().map(|(r, s)| (r, GradualSens::exact(s))));
        StaticSensEnv(env.0.into_iter().map(|(r, g)| (r, g.lo())).collect())
    }

    pub fn get(&self, r: &ResourceVar) -> Sens {
        self.0.iter().find(|(k, _)| k == r).map(|(_, s)| *s).unwrap_or(Sens::ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ResourceVar, Sens)> {
        self.0.iter().map(|(r, s)| (r, *s))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn embed(&self) -> SensEnv {
        SensEnv(self.0.iter().filter(|(_, s)| !s.is_zero()).map(|(r, s)| (r.clone(), GradualSens::exact(*s))).collect())
    }

    pub fn dot(&self, other: &StaticSensEnv) -> Sens {
        self.0.iter().fold(Sens::ZERO, |acc, (r, s)| acc.add(s.mul(other.get(r))))
    }

    pub fn is_bounded(&self) -> bool {
        self.0.iter().all(|(_, s)| !s.is_inf())
    }

    pub fn join(&self, other: &StaticSensEnv) -> StaticSensEnv {
        StaticSensEnv(
            self.embed().join(&other.embed()).0.into_iter().map(|(r, g)| (r, g.hi())).collect(),
        )
    }
}

impl fmt::Debug for StaticSensEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.embed())
    }
}

impl fmt::Display for StaticSensEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.embed())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(lo: f64, hi: f64) -> GradualSens {
        GradualSens::from_f64(lo, hi).unwrap()
    }

    fn r(n: &str) -> ResourceVar {
        ResourceVar::named(n)
    }

    #[test]
    fn boundwise_arithmetic() {
        assert_eq!(g(1.0, 2.0).add(g(3.0, 4.0)), g(4.0, 6.0));
        assert_eq!(g(0.0, 0.0).mul(g(f64::INFINITY, f64::INFINITY)), g(0.0, 0.0));
        assert_eq!(g(1.0, 3.0).join(g(2.0, 5.0)), g(2.0, 5.0));
        assert_eq!(g(5.0, 5.0).meet(g(10.0, 10.0)), None);
        assert_eq!(g(0.0, 10.0).meet(g(5.0, 20.0)), Some(g(5.0, 10.0)));
        assert_eq!(g(5.0, 5.0).min(g(10.0, 10.0)), g(5.0, 5.0));
    }


    #[test]
    fn precision_and_consistency() {
        assert!(g(5.0, 10.0).precise_in(g(0.0, 10.0)));
        assert!(!g(0.0, 10.0).precise_in(g(5.0, 10.0)));
        assert!(g(5.0, 5.0).cleq(g(0.0, 10.0)));
        assert!(!g(10.0, 10.0).cleq(g(0.0, 5.0)));
        assert!(GradualSens::UNKNOWN.cleq(g(3.0, 3.0)));
        assert!(g(3.0, 3.0).cleq(GradualSens::UNKNOWN));
        assert!(g(2.0, 4.0).clt(g(1.0, f64::INFINITY)));
        assert!(!g(1.0, 1.0).clt(g(0.0, 1.0)));
        assert!(!g(0.0, 0.0).clt(g(0.0, 0.0)));
    }

    #[test]
    fn cleq_is_not_transitive() {
        let two = g(2.0, 2.0);
        let one = g(1.0, 1.0);
        assert!(two.cleq(GradualSens::UNKNOWN));
        assert!(GradualSens::UNKNOWN.cleq(one));
        assert!(!two.cleq(one));
    }

    #[test]
    fn env_ops() {
        let a = SensEnv::from_entries([(r("r1"), g(1.0, 1.0)), (r("r2"), g(3.0, 3.0))]);
        let b = SensEnv::single(r("r1"), g(2.0, 2.0));
        assert_eq!(a.add(&b), SensEnv::from_entries([(r("r1"), g(3.0, 3.0)), (r("r2"), g(3.0, 3.0))]));
        let c = SensEnv::from_entries([(r("r"), g(1.0, 1.0)), (r("s"), g(2.0, 2.0))]);
        let inf = GradualSens::exact(Sens::INF);
        assert_eq!(c.scale(inf), SensEnv::from_entries([(r("r"), inf), (r("s"), inf)]));
        let j = SensEnv::single(r("r"), g(2.0, 2.0)).join(&SensEnv::single(r("r"), g(0.0, 3.0)));
        assert_eq!(j, SensEnv::single(r("r"), g(2.0, 3.0)));
    }

    #[test]
    fn substitution_examples() {
        let repl = SensEnv::from_entries([(r("r2"), g(2.0, 2.0)), (r("r3"), g(1.0, 1.0))]);
        let target = SensEnv::from_entries([(r("r1"), g(3.0, 3.0)), (r("r2"), GradualSens::UNKNOWN)]);
        assert_eq!(
            target.subst(&r("r1"), &repl),
            SensEnv::from_entries([(r("r2"), g(6.0, f64::INFINITY)), (r("r3"), g(3.0, 3.0))])
        );
        let target = SensEnv::from_entries([(r("r1"), g(3.0, 3.0)), (r("r2"), g(1.0, 1.0))]);
        assert_eq!(
            target.subst(&r("r1"), &repl),
            SensEnv::from_entries([(r("r2"), g(7.0, 7.0)), (r("r3"), g(3.0, 3.0))])
        );
        assert_eq!(target.subst(&r("zz"), &repl), target);
    }

    #[test]
    fn dot_and_predicates() {
        let five = SensEnv::single(r("r"), g(5.0, 5.0));
        let two = SensEnv::single(r("r"), g(2.0, 2.0));
        assert_eq!(two.dot(&five), g(10.0, 10.0));
        assert_eq!(SensEnv::single(r("r"), g(1.0, 2.0)).dot(&SensEnv::single(r("r"), g(3.0, 3.0))), g(3.0, 6.0));
        assert_eq!(SensEnv::empty().dot(&five), GradualSens::ZERO);
        let b = SensEnv::from_entries([(r("r"), g(0.0, 3.0)), (r("s"), g(2.0, 2.0))]);
        assert!(b.is_bounded());
        assert!(!SensEnv::single(r("r"), GradualSens::UNKNOWN).is_bounded());
        assert_eq!(
            SensEnv::single(r("r1"), g(2.0, f64::INFINITY)).lower(),
            StaticSensEnv::from_entries([(r("r1"), Sens::new(2.0).unwrap())])
        );
        let lhs = SensEnv::from_entries([(r("r"), g(1.0, 1.0)), (r("r2"), g(3.0, 3.0))]);
        let rhs = SensEnv::from_entries([(r("r"), GradualSens::UNKNOWN), (r("r2"), GradualSens::UNKNOWN)]);
        assert!(lhs.cleq(&rhs));
    }

    #[test]
    fn display() {
        let e = SensEnv::from_entries([
            (r("r1"), g(2.0, 2.0)),
            (r("r2"), g(0.0, 3.0)),
            (r("r3"), GradualSens::UNKNOWN),
            (r("r4"), g(1.0, 1.0)),
        ]);
        assert_eq!(e.to_string(), "2r1 + [0,3]r2 + ?r3 + r4");
        assert_eq!(SensEnv::single(r("r"), g(2.0, f64::INFINITY)).to_string(), "[2,inf]r");
    }
}
