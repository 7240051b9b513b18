//! Primitive operators: their static effect rule and their interpretation.

use std::fmt;

use crate::sens::{GradualSens, Sens, SensEnv};
use crate::types::{Evidence, SType, Type};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum PrimOp {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
    Not,
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub enum Const {
    Real(f64),
    Bool(bool),
    Unit,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OpError {
    DivisionByZero,
    Mismatch,
}

impl PrimOp {
    pub fn arity(self) -> usize {
        match self {
            PrimOp::Neg | PrimOp::Not => 1,
            _ => 2,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            PrimOp::Add => "+",
            PrimOp::Sub | PrimOp::Neg => "-",
            PrimOp::Mul => "*",
            PrimOp::Div => "/",
            PrimOp::Lt => "<",
            PrimOp::Le => "<=",
            PrimOp::Gt => ">",
            PrimOp::Ge => ">=",
            PrimOp::Eq => "==",
            PrimOp::Ne => "!=",
            PrimOp::And => "&&",
            PrimOp::Or => "||",
            PrimOp::Not => "!",
        }
    }

    /// Binding strength for printing; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            PrimOp::Or => 1,
            PrimOp::And => 2,
            PrimOp::Lt | PrimOp::Le | PrimOp::Gt | PrimOp::Ge | PrimOp::Eq | PrimOp::Ne => 3,
            PrimOp::Add | PrimOp::Sub => 4,
            PrimOp::Mul | PrimOp::Div => 5,
            PrimOp::Neg | PrimOp::Not => 6,
        }
    }

    /// `Iop`: the result type of the operator, or `None` on a base-type mismatch.
    pub fn result_type(self, args: &[SType]) -> Option<SType> {
        if args.len() != self.arity() {
            return None;
        }
        let ty = |i: usize| args[i].ty();
        let total = args.iter().fold(SensEnv::empty(), |acc, g| acc.add(&g.eff()));
        let inf = GradualSens::exact(Sens::INF);
        match self {
            PrimOp::Add | PrimOp::Sub => {
                (matches!(ty(0)?, Type::Real) && matches!(ty(1)?, Type::Real)).then(|| SType::real(total))
            }
            PrimOp::Neg => matches!(ty(0)?, Type::Real).then(|| SType::real(total)),
            PrimOp::Mul | PrimOp::Div => (matches!(ty(0)?, Type::Real) && matches!(ty(1)?, Type::Real))
                .then(|| SType::real(total.scale(inf))),
            PrimOp::Lt | PrimOp::Le | PrimOp::Gt | PrimOp::Ge => {
                (matches!(ty(0)?, Type::Real) && matches!(ty(1)?, Type::Real))
                    .then(|| SType::bool(total.scale(inf)))
            }
            PrimOp::Eq | PrimOp::Ne => {
                let same = matches!(
                    (ty(0)?, ty(1)?),
                    (Type::Real, Type::Real) | (Type::Bool, Type::Bool) | (Type::Unit, Type::Unit)
                );
                same.then(|| SType::bool(total.scale(inf)))
            }
            PrimOp::And | PrimOp::Or => {
                (matches!(ty(0)?, Type::Bool) && matches!(ty(1)?, Type::Bool)).then(|| SType::bool(total))
            }
            PrimOp::Not => matches!(ty(0)?, Type::Bool).then(|| SType::bool(total)),
        }
    }

    /// `Iop²`: the operator lifted componentwise to evidence.
    pub fn result_evidence(self, args: &[Evidence]) -> Option<Evidence> {
        let lhs: Vec<SType> = args.iter().map(|e| e.lhs.clone()).collect();
        let rhs: Vec<SType> = args.iter().map(|e| e.rhs.clone()).collect();
        Some(Evidence::new(self.result_type(&lhs)?, self.result_type(&rhs)?))
    }

    /// `⟦op⟧`.
    pub fn apply(self, args: &[Const]) -> Result<Const, OpError> {
        use Const::*;
        Ok(match (self, args) {
            (PrimOp::Add, [Real(a), Real(b)]) => Real(a + b),
            (PrimOp::Sub, [Real(a), Real(b)]) => Real(a - b),
            (PrimOp::Mul, [Real(a), Real(b)]) => Real(a * b),
            (PrimOp::Div, [Real(_), Real(b)]) if *b == 0.0 => return Err(OpError::DivisionByZero),
            (PrimOp::Div, [Real(a), Real(b)]) => Real(a / b),
            (PrimOp::Neg, [Real(a)]) => Real(-a),
            (PrimOp::Lt, [Real(a), Real(b)]) => Bool(a < b),
            (PrimOp::Le, [Real(a), Real(b)]) => Bool(a <= b),
            (PrimOp::Gt, [Real(a), Real(b)]) => Bool(a > b),
            (PrimOp::Ge, [Real(a), Real(b)]) => Bool(a >= b),
            (PrimOp::Eq, [a, b]) => Bool(a == b),
            (PrimOp::Ne, [a, b]) => Bool(a != b),
            (PrimOp::And, [Bool(a), Bool(b)]) => Bool(*a && *b),
            (PrimOp::Or, [Bool(a), Bool(b)]) => Bool(*a || *b),
            (PrimOp::Not, [Bool(a)]) => Bool(!a),
            _ => return Err(OpError::Mismatch),
        })
    }
}

impl Const {
    pub fn base_type(self) -> Type {
        match self {
            Const::Real(_) => Type::Real,
            Const::Bool(_) => Type::Bool,
            Const::Unit => Type::Unit,
        }
    }
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const::Real(v) => crate::sens::fmt_number(*v, f),
            Const::Bool(b) => write!(f, "{}", b),
            Const::Unit => write!(f, "()"),
        }
    }
}
