//! Re-typing of elaborated terms.
//!
//! Checks that every ascription's evidence is at least as precise as the
//! interior of the types it relates, and recomputes each node's type without
//! consulting the elaborator.

use std::fmt;

use crate::sens::{GradualSens, ResourceVar, Sens};
use crate::term::{Term, Var};
use crate::types::{interior, stype_join, Evidence, SType, Type};

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationError {
    pub message: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for ValidationError {}

type V<T> = Result<T, ValidationError>;

fn fail<T>(message: impl Into<String>) -> V<T> {
    Err(ValidationError { message: message.into() })
}

fn need<T>(x: Option<T>, what: &str) -> V<T> {
    match x {
        Some(v) => Ok(v),
        None => fail(what.to_string()),
    }
}

fn same(found: &SType, expected: &SType, what: &str) -> V<()> {
    if found.alpha_eq(expected) {
        Ok(())
    } else {
        fail(format!("{}: `{}` differs from `{}`", what, found, expected))
    }
}

/// `ε ⊢ from ≲ to`.
fn justifies(ev: &Evidence, from: &SType, to: &SType) -> V<()> {
    let Some(i) = interior(from, to) else {
        return fail(format!("no interior for `{}` and `{}`", from, to));
    };
    if ev.precise_in(&i) {
        Ok(())
    } else {
        fail(format!("evidence {} is not below I({}, {}) = {}", ev, from, to, i))
    }
}

pub struct Validator {
    vars: Vec<(Var, SType)>,
    res: Vec<ResourceVar>,
    /// Number of ascriptions checked.
    pub ascriptions: usize,
}

impl Validator {
    /// `free` lists the resources allowed free in the term.
    pub fn new(free: &[ResourceVar]) -> Validator {
        Validator { vars: Vec::new(), res: free.to_vec(), ascriptions: 0 }
    }

    pub fn bind(&mut self, x: Var, g: SType) {
        self.vars.push((x, g));
    }

    fn well_formed(&self, g: &SType) -> V<()> {
        if crate::elab::well_formed(&self.res, g) {
            Ok(())
        } else {
            fail(format!("`{}` mentions resources out of scope", g))
        }
    }

    fn value_ev(&mut self, ev: &Evidence, own: &SType, g: &SType) -> V<SType> {
        self.well_formed(g)?;
        self.ascriptions += 1;
        justifies(ev, own, g)?;
        Ok(g.clone())
    }

    fn under<T>(&mut self, x: &Var, g: &SType, f: impl FnOnce(&mut Self) -> V<T>) -> V<T> {
        self.vars.push((x.clone(), g.clone()));
        let r = f(self);
        self.vars.pop();
        r
    }

    pub fn type_of(&mut self, t: &Term) -> V<SType> {
        let inf = GradualSens::exact(Sens::INF);
        match t {
            Term::Const(ev, c, g) => self.value_ev(ev, &SType::pure(c.base_type()), g),
            Term::Lam(ev, x, p, body, g) => {
                self.well_formed(p)?;
                let gb = self.under(x, p, |s| s.type_of(body))?;
                self.value_ev(ev, &SType::arrow(p.clone(), gb, Default::default()), g)
            }
            Term::ResLam(ev, r, body, g) => {
                self.res.push(r.clone());
                let gb = self.type_of(body);
                self.res.pop();
                self.value_ev(ev, &SType::pure(Type::Forall(r.clone(), gb?)), g)
            }
            Term::Pair(ev, a, b, g) => {
                let own = SType::pure(Type::Prod(self.type_of(a)?, self.type_of(b)?));
                self.value_ev(ev, &own, g)
            }
            Term::Inl(ev, a, g) | Term::Inr(ev, a, g) => {
                let ga = self.type_of(a)?;
                let Some(Type::Sum(l, r)) = g.ty() else { return fail(format!("injection at non-sum `{}`", g)) };
                let own = if matches!(t, Term::Inl(..)) {
                    SType::pure(Type::Sum(ga, r.clone()))
                } else {
                    SType::pure(Type::Sum(l.clone(), ga))
                };
                self.value_ev(ev, &own, g)
            }
            Term::Fold(ev, a, g) => {
                let ga = self.type_of(a)?;
                let unf = need(g.unf(), "fold at a non-recursive type")?;
                same(&ga, &unf, "fold body")?;
                self.value_ev(ev, &g.with_eff(Default::default()), g)
            }
            Term::List(ev, xs, g) => {
                let elem = need(g.elem(), "list literal at a non-list type")?;
                for x in xs {
                    same(&self.type_of(x)?, &elem, "list element")?;
                }
                self.value_ev(ev, &g.with_eff(Default::default()), g)
            }
            Term::Var(x) => match self.vars.iter().rev().find(|(y, _)| y == x) {
                Some((_, g)) => Ok(g.clone()),
                None => fail(format!("unbound variable {:?}", x)),
            },
            Term::Op(op, xs, _) => {
                let tys = xs.iter().map(|x| self.type_of(x)).collect::<V<Vec<_>>>()?;
                need(op.result_type(&tys), "operator mismatch")
            }
            Term::App(f, a, _) => {
                let gf = self.type_of(f)?;
                let ga = self.type_of(a)?;
                same(&ga, &need(gf.dom(), "application of a non-function")?, "argument")?;
                need(gf.cod(), "codomain")
            }
            Term::ResApp(f, s, _) => {
                let gf = self.type_of(f)?;
                need(gf.inst(s), "instantiation of a non-abstraction")
            }
            Term::Ascr(ev, a, g, _) => {
                let ga = self.type_of(a)?;
                self.value_ev(ev, &ga, g)
            }
            Term::Fst(a, _) => need(self.type_of(a)?.first(), "fst of a non-pair"),
            Term::Snd(a, _) => need(self.type_of(a)?.second(), "snd of a non-pair"),
            Term::Unfold(a, _) => need(self.type_of(a)?.unf(), "unfold of a non-recursive type"),
            Term::Case { scrut, left, right, tys, .. } => {
                let gs = self.type_of(scrut)?;
                let gl = need(gs.left(), "case on a non-sum")?;
                let gr = need(gs.right(), "case on a non-sum")?;
                let g2 = self.under(&left.0, &gl, |s| s.type_of(&left.1))?;
                let g3 = self.under(&right.0, &gr, |s| s.type_of(&right.1))?;
                self.branches(&g2, &g3, tys, &gs)
            }
            Term::If { cond, then, els, tys, .. } => {
                let gc = self.type_of(cond)?;
                if !matches!(gc.ty(), Some(Type::Bool)) {
                    return fail(format!("condition of type `{}`", gc));
                }
                let g2 = self.type_of(then)?;
                let g3 = self.type_of(els)?;
                self.branches(&g2, &g3, tys, &gc)
            }
            Term::Fix(f, g, body) => {
                self.well_formed(g)?;
                let gb = self.under(f, g, |s| s.type_of(body))?;
                same(&gb, g, "fixpoint body")?;
                Ok(g.clone())
            }
            Term::Try(a, b, g) => {
                same(&self.type_of(a)?, g, "try body")?;
                same(&self.type_of(b)?, g, "catch body")?;
                Ok(g.clone())
            }
            Term::Get(l, i, _) => {
                let gl = self.type_of(l)?;
                let gi = self.type_of(i)?;
                Ok(need(gl.elem(), "get on a non-list")?.plus(&gi.eff().scale(inf)))
            }
            Term::Length(l, _) => {
                let gl = self.type_of(l)?;
                need(gl.elem(), "length of a non-list")?;
                Ok(SType::real(gl.eff().scale(inf)))
            }
            Term::IndexOf(l, p, g, _) => {
                let gl = self.type_of(l)?;
                let gp = self.type_of(p)?;
                need(gl.elem(), "indexOf on a non-list")?;
                let cod = need(gp.cod(), "indexOf predicate")?;
                let expect = SType::real(gl.eff().add(&gp.eff()).add(&cod.eff()).scale(inf));
                same(g, &expect, "indexOf result")?;
                Ok(g.clone())
            }
            Term::Laplace(v, _, eps, _) => {
                self.type_of(v)?;
                self.type_of(eps)?;
                Ok(SType::real(Default::default()))
            }
        }
    }

    fn branches(&mut self, g2: &SType, g3: &SType, tys: &crate::term::Branches, scrut: &SType) -> V<SType> {
        same(g2, &tys.left, "first branch")?;
        same(g3, &tys.right, "second branch")?;
        let j = need(stype_join(g2, g3), "branches without a join")?;
        same(&j, &tys.join, "branch join")?;
        Ok(j.join_eff(&scrut.eff()))
    }
}

/// Re-types a closed term.
pub fn validate(t: &Term) -> V<SType> {
    Validator::new(&[]).type_of(t)
}
