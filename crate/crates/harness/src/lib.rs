//! Randomized validation of metric preservation, the gradual guarantees and
//! the evidence algebra.

pub mod corpus;
pub mod evidence;
pub mod gg;
pub mod mp;
pub mod target;

use std::fmt;

use gsens_core::session::GsError;

pub use corpus::{load_dir, CorpusProgram};
pub use evidence::{ctrans_assoc_fuzz, ctrans_monotonicity_fuzz, LawReport};
pub use gg::{gg_fuzz, uses_try, GgKind, GgReport};
pub use mp::{distance, mp_check, ts_mp_check, MPReport, MPSpec, Violation, ViolationKind};
pub use target::{parse_distance, parse_sens_env, Target};

#[derive(Debug)]
pub enum HarnessError {
    Program(GsError),
    /// The program has no top-level function binding.
    NoTarget,
    NonBaseParam(String),
    NonBaseResult(String),
    Spec(String),
    /// Termination-sensitive checking needs bounded claims and distances.
    Unbounded(String),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Program(e) => write!(f, "{}", e),
            HarnessError::NoTarget => write!(f, "no top-level function to test"),
            HarnessError::NonBaseParam(t) => write!(f, "parameter of type `{}` is not a base type", t),
            HarnessError::NonBaseResult(t) => write!(f, "result of type `{}` is not a base type", t),
            HarnessError::Spec(m) => write!(f, "{}", m),
            HarnessError::Unbounded(m) => write!(f, "unbounded imprecision: {}", m),
        }
    }
}

impl std::error::Error for HarnessError {}
