//! Gradual sensitivity typing: the sensitivity algebra, types and evidence,
//! the surface language, elaboration into an evidence-carrying core, and an
//! evaluator that monitors sensitivity at runtime.

pub mod elab;
pub mod eval;
pub mod ops;
pub mod syntax;
pub mod sens;
pub mod session;
pub mod term;
pub mod types;
pub mod validate;

pub use ops::{Const, PrimOp};
pub use sens::{GradualSens, ResourceVar, Sens, SensEnv, StaticSensEnv};
pub use types::{ctrans, interior, stype_join, Evidence, RecVar, SType, Type};
