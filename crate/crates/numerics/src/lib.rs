//! Numerical half of `spdecrit`: pseudo-spectral fields on the torus,
//! white-noise sampling, Littlewood–Paley diagnostics, a damped heat solver
//! with the tools used to check uniqueness for it, and the Tychonov series.
//!
//! Everything stochastic is a pure function of an explicit `u64` seed.

pub mod blocks;
pub mod field;
pub mod heat;
pub mod inequality;
pub mod noise;
pub mod snapshot;
pub mod steklov;
pub mod tychonov;

use thiserror::Error;

pub use blocks::{
    bony_decompose, estimate_holder_exponent, littlewood_paley_blocks, BonyParts, LpBlock,
};
pub use field::{FftPlan, PeriodicField, Trajectory};
pub use heat::{l1_contraction_curve, power_difference_residual, solve_damped_heat, weak_residual};
pub use inequality::{proof_inequality_gap, proof_inequality_gap_exact};
pub use noise::{sample_spatial_white, solve_z1_mild, synthetic_field, Z1Params};
pub use steklov::steklov_average;
pub use tychonov::TychonovSeries;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("E_SHAPE: {0}")]
    Shape(String),
    #[error("E_RESOLUTION: {0}")]
    Resolution(String),
    #[error("E_PARAM: {0}")]
    Param(String),
    #[error("E_STABILITY: dt * max|u|^(n-1) = {0} must be < 1/2")]
    Stability(f64),
    #[error("E_BLOWUP: |u| exceeded 1e6 at step {0}")]
    Blowup(usize),
    #[error("E_OVERFLOW: series term exceeded 1e300 at k = {0}")]
    Overflow(usize),
    #[error("E_FORMAT: {0}")]
    Format(String),
    #[error("E_IO: {0}")]
    Io(#[from] std::io::Error),
}

impl NumericsError {
    pub fn code(&self) -> &'static str {
        match self {
            NumericsError::Shape(_) => "E_SHAPE",
            NumericsError::Resolution(_) => "E_RESOLUTION",
            NumericsError::Param(_) => "E_PARAM",
            NumericsError::Stability(_) => "E_STABILITY",
            NumericsError::Blowup(_) => "E_BLOWUP",
            NumericsError::Overflow(_) => "E_OVERFLOW",
            NumericsError::Format(_) => "E_FORMAT",
            NumericsError::Io(_) => "E_IO",
        }
    }
}

pub type Result<T> = std::result::Result<T, NumericsError>;
