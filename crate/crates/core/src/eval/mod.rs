//! Evaluation of the evidence-carrying core.
//!
//! [`machine`] is the CEK machine used everywhere; [`subst`] is a direct
//! small-step reading of the reduction rules over terms, kept as a reference
//! to compare the machine against.

pub mod machine;
pub mod subst;
pub mod value;

pub use machine::{ascribe_value, eval, laplace_from_uniform, sample_laplace, Machine, RuntimeError, TraceStep, DEFAULT_STEP_BUDGET};
pub use value::{msens, Env, Payload, Value};
