//! Symbolic half of `spdecrit`: exact regularity arithmetic in parabolic
//! Hölder–Besov scales, a small DSL describing singular SPDEs, and the
//! Da Prato–Debussche tree expansion that classifies local subcriticality.

pub mod dsl;
pub mod expansion;
pub mod rational;
pub mod regularity;
pub mod scaling;

pub use dsl::{
    format_spec, parse_spec, parse_spec_bytes, validate_spec, Dimension, NonlinearTerm,
    ParseError, SpdeSpec,
};
pub use expansion::{
    classify, classify_at, expand, gain_per_step, renormalization_flags, Classification,
    CriticalityReport, ExpansionError, ExpansionRow, ProductTerm, DEFAULT_LEVELS, MAX_LEVELS,
};
pub use rational::{rat, Rational};
pub use regularity::{DimExpr, NoiseKind, RegBound, ScalingInfo};
pub use scaling::{scaling_exponent, ParamAffine, ScalingError, ScalingExponent};
