//! Closed-form scaling exponent of a nonlinearity.
//!
//! Rescaling the equation so that the noise term is invariant leaves each
//! nonlinear term with a factor `λ^e`. With `s` the regularity of the
//! noise-driven linear solution, a term of degree `n` and total derivative
//! order `D` has `e = (n - 1)s - D + γ`; `e > 0` is the subcritical regime.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{Dimension, NonlinearTerm, SpdeSpec};
use crate::rational::{format_rational, serde_rational, Rational};
use crate::regularity::{format_symbol_coeff, join_terms, DimExpr, NoiseKind};

/// `c0 + cd·d + cg·gamma + ca·alpha + cg1·gamma1`, exact.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ParamAffine {
    #[serde(with = "serde_rational")]
    pub c0: Rational,
    #[serde(with = "serde_rational")]
    pub d: Rational,
    #[serde(with = "serde_rational")]
    pub gamma: Rational,
    #[serde(with = "serde_rational")]
    pub alpha: Rational,
    #[serde(with = "serde_rational")]
    pub gamma1: Rational,
}

impl ParamAffine {
    pub fn constant(c0: Rational) -> Self {
        Self { c0, ..Self::default() }
    }

    fn add(&self, o: &Self) -> Self {
        Self {
            c0: &self.c0 + &o.c0,
            d: &self.d + &o.d,
            gamma: &self.gamma + &o.gamma,
            alpha: &self.alpha + &o.alpha,
            gamma1: &self.gamma1 + &o.gamma1,
        }
    }

    fn scale(&self, k: &Rational) -> Self {
        Self {
            c0: &self.c0 * k,
            d: &self.d * k,
            gamma: &self.gamma * k,
            alpha: &self.alpha * k,
            gamma1: &self.gamma1 * k,
        }
    }

    /// Substitutes `gamma`, `alpha` and `gamma1`, leaving an expression in `d`.
    pub fn substitute(&self, gamma: &Rational, alpha: &Rational, gamma1: &Rational) -> DimExpr {
        let c0 = &self.c0 + &self.gamma * gamma + &self.alpha * alpha + &self.gamma1 * gamma1;
        DimExpr::new(c0, self.d.clone())
    }

    /// Substitutes a concrete dimension.
    pub fn at_dimension(&self, d: i64) -> Self {
        let dd = Rational::from_integer(BigInt::from(d));
        Self { c0: &self.c0 + &self.d * &dd, d: Rational::zero(), ..self.clone() }
    }
}

impl fmt::Display for ParamAffine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        if !self.c0.is_zero() {
            terms.push((self.c0.is_negative(), format_rational(&self.c0.abs())));
        }
        for (coeff, sym) in [
            (&self.d, "d"),
            (&self.gamma, "gamma"),
            (&self.alpha, "alpha"),
            (&self.gamma1, "gamma1"),
        ] {
            if !coeff.is_zero() {
                terms.push((coeff.is_negative(), format_symbol_coeff(coeff, sym)));
            }
        }
        f.write_str(&join_terms(&terms))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalingExponent {
    /// The exponent as a function of the free parameters.
    pub symbolic: ParamAffine,
    /// The exponent at the specification's own parameter values.
    pub bound: DimExpr,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalingError {
    #[error("E_MULTI_TERM: nonlinear terms scale differently ({})", list(.per_term))]
    MultiTerm { per_term: Vec<ScalingExponent> },
    #[error("E_NO_NONLINEARITY: no nonlinear term")]
    NoNonlinearity,
}

fn list(per_term: &[ScalingExponent]) -> String {
    per_term.iter().map(|e| e.bound.to_string()).collect::<Vec<_>>().join(", ")
}

impl ScalingError {
    /// Minimum over the per-term exponents at a concrete dimension.
    pub fn min_at(&self, d: i64) -> Option<Rational> {
        match self {
            ScalingError::MultiTerm { per_term } => per_term.iter().map(|e| e.bound.eval(d)).min(),
            ScalingError::NoNonlinearity => None,
        }
    }
}

fn half() -> Rational {
    Rational::new(BigInt::one(), BigInt::from(2))
}

/// Regularity of the noise-driven linear solution as a function of the free
/// parameters.
fn linear_solution_regularity(spec: &SpdeSpec) -> ParamAffine {
    let mut s = ParamAffine { alpha: -Rational::one(), ..Default::default() };
    match spec.noise.kind {
        NoiseKind::SpaceTimeWhite => {
            s.gamma = -half();
            s.d = -half();
        }
        NoiseKind::SpatialWhite => s.d = -half(),
    }
    if spec.z1_diffusion_order.is_some() {
        s.gamma1 = Rational::one();
    } else {
        s.gamma += Rational::one();
    }
    s
}

/// Exponent of one nonlinear term.
pub fn term_exponent(spec: &SpdeSpec, term: &NonlinearTerm) -> ScalingExponent {
    let s = linear_solution_regularity(spec);
    let n_minus_one = Rational::from_integer(BigInt::from(term.degree)) - Rational::one();
    let mut e = s.scale(&n_minus_one);
    e = e.add(&ParamAffine { gamma: Rational::one(), ..Default::default() });
    e = e.add(&ParamAffine::constant(-term.total_derivative_order()));
    if let Dimension::Concrete(d) = spec.dimension {
        e = e.at_dimension(d);
    }
    let bound = e.substitute(
        &spec.diffusion_order,
        &spec.noise.lift_alpha,
        spec.z1_order(),
    );
    ScalingExponent { symbolic: e, bound }
}

/// Scaling exponent of the specification's nonlinearity.
///
/// Several terms are accepted when they share one exponent; otherwise
/// `E_MULTI_TERM` carries the per-term list.
pub fn scaling_exponent(spec: &SpdeSpec) -> Result<ScalingExponent, ScalingError> {
    let per_term: Vec<ScalingExponent> =
        spec.nonlinear_terms.iter().map(|t| term_exponent(spec, t)).collect();
    let Some(first) = per_term.first() else {
        return Err(ScalingError::NoNonlinearity);
    };
    if per_term.iter().all(|e| e.bound == first.bound) {
        Ok(first.clone())
    } else {
        Err(ScalingError::MultiTerm { per_term })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{NoiseSpec, Projector, UnknownRank};
    use crate::rational::{int, rat};

    fn nse() -> SpdeSpec {
        let mut term = NonlinearTerm::new(2);
        term.outer_derivative_order = int(1);
        term.projectors = vec![Projector::Leray];
        SpdeSpec {
            name: "nse".into(),
            dimension: Dimension::Symbolic,
            unknown_name: "u".into(),
            unknown_rank: UnknownRank::Vector,
            diffusion_order: int(2),
            z1_diffusion_order: None,
            noise: NoiseSpec { kind: NoiseKind::SpaceTimeWhite, lift_alpha: int(0) },
            nonlinear_terms: vec![term],
        }
    }

    #[test]
    fn navier_stokes_exponent() {
        let e = scaling_exponent(&nse()).unwrap();
        assert_eq!(e.bound, DimExpr::new(int(2), rat(-1, 2)));
        assert_eq!(e.bound.to_string(), "2 - d/2");
    }

    #[test]
    fn sqg_exponent_is_symbolic_in_gamma_alpha() {
        let mut spec = nse();
        spec.dimension = Dimension::Concrete(2);
        spec.unknown_rank = UnknownRank::Scalar;
        spec.diffusion_order = rat(1, 2);
        spec.noise = NoiseSpec { kind: NoiseKind::SpatialWhite, lift_alpha: rat(1, 4) };
        let term = &mut spec.nonlinear_terms[0];
        term.inner_derivative_orders = vec![int(0), int(1)];
        term.outer_derivative_order = int(0);
        term.projectors = vec![Projector::Riesz];
        let e = scaling_exponent(&spec).unwrap();
        assert_eq!(e.symbolic.to_string(), "-2 + 2gamma - alpha");
        assert_eq!(e.bound, DimExpr::constant(rat(-5, 4)));
    }

    #[test]
    fn aux_order_enters_through_gamma1() {
        let mut spec = nse();
        spec.z1_diffusion_order = Some(rat(5, 2));
        let e = scaling_exponent(&spec).unwrap();
        assert_eq!(e.symbolic.to_string(), "-1 - d/2 + gamma/2 - alpha + gamma1");
        assert_eq!(e.bound, DimExpr::new(rat(5, 2), rat(-1, 2)));
    }

    #[test]
    fn mixed_terms_report_each_exponent() {
        let mut spec = nse();
        spec.nonlinear_terms.push(NonlinearTerm::new(3));
        spec.dimension = Dimension::Concrete(3);
        let err = scaling_exponent(&spec).unwrap_err();
        let ScalingError::MultiTerm { per_term } = &err else { panic!() };
        assert_eq!(per_term.len(), 2);
        assert_eq!(err.min_at(3), Some(rat(1, 2)));
    }
}
