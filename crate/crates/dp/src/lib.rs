//! Differential privacy on top of gradual sensitivities: Laplace noise, the
//! gradual Laplace mechanism (GLM), gradual above-threshold (GAT) and a
//! statistical check of ε-differential privacy.

pub mod mechanism;
pub mod verify;

use std::fmt;

use gsens_core::eval::{laplace_from_uniform, sample_laplace, RuntimeError};
use gsens_harness::HarnessError;
use rand::Rng;

pub use mechanism::{gat, glm, Gat, Glm};
pub use verify::{dp_ratio_test, DPReport, RatioConfig, Verdict};

#[derive(Debug)]
pub enum DpError {
    /// The Laplace scale must be positive.
    Scale(f64),
    Epsilon(f64),
    Program(HarnessError),
    Runtime(RuntimeError),
}

impl fmt::Display for DpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DpError::Scale(b) => write!(f, "Laplace scale must be positive, got {}", b),
            DpError::Epsilon(e) => write!(f, "epsilon must be positive, got {}", e),
            DpError::Program(e) => write!(f, "{}", e),
            DpError::Runtime(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for DpError {}

impl From<HarnessError> for DpError {
    fn from(e: HarnessError) -> Self {
        DpError::Program(e)
    }
}

impl From<RuntimeError> for DpError {
    fn from(e: RuntimeError) -> Self {
        DpError::Runtime(e)
    }
}

/// Laplace distribution centred at 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaplaceParams {
    b: f64,
}

impl LaplaceParams {
    pub fn new(b: f64) -> Result<LaplaceParams, DpError> {
        if b > 0.0 && b.is_finite() {
            Ok(LaplaceParams { b })
        } else {
            Err(DpError::Scale(b))
        }
    }

    pub fn scale(self) -> f64 {
        self.b
    }

    /// Inverse CDF at `u ∈ (-1/2, 1/2)`.
    pub fn quantile(self, u: f64) -> f64 {
        laplace_from_uniform(self.b, u)
    }

    pub fn density(self, x: f64) -> f64 {
        (-x.abs() / self.b).exp() / (2.0 * self.b)
    }

    pub fn cdf(self, x: f64) -> f64 {
        if x < 0.0 {
            0.5 * (x / self.b).exp()
        } else {
            1.0 - 0.5 * (-x / self.b).exp()
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        sample_laplace(self.b, rng)
    }
}

pub fn laplace_sample<R: Rng + ?Sized>(b: f64, rng: &mut R) -> Result<f64, DpError> {
    Ok(LaplaceParams::new(b)?.sample(rng))
}
