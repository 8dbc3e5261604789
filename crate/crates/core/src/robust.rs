//! Huber penalty used by the phenology fit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("Huber shape parameter must be positive and finite, got {0}")]
pub struct InvalidHuberParam(pub f64);

/// Shape parameter of the Huber penalty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HuberParams {
    phi: f64,
}

impl HuberParams {
    pub const DEFAULT_PHI: f64 = 1.35;

    pub fn new(phi: f64) -> Result<Self, InvalidHuberParam> {
        if phi > 0.0 && phi.is_finite() {
            Ok(Self { phi })
        } else {
            Err(InvalidHuberParam(phi))
        }
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

impl Default for HuberParams {
    fn default() -> Self {
        Self {
            phi: Self::DEFAULT_PHI,
        }
    }
}

/// `z²` inside `[-φ, φ]`, `2φ|z| - φ²` outside.
#[inline]
pub fn huber(z: f64, params: HuberParams) -> f64 {
    let phi = params.phi;
    let a = z.abs();
    if a <= phi {
        z * z
    } else {
        2.0 * phi * a - phi * phi
    }
}
