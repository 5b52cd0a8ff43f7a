//! Open regularity bounds in the parabolic Hölder–Besov scale `C^β_s`.
//!
//! A bound is always *open*: [`RegBound`] with supremum `c` means "regularity
//! β for every β < c", never β = c. Suprema are affine in the spatial
//! dimension `d` with exact rational coefficients, so tables such as
//! `β < 3 - 3d/2` are represented without rounding.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{format_rational, serde_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegularityError {
    #[error("noise lift must be non-negative, got {0}")]
    NegativeLift(String),
    #[error("operator order must be non-negative, got {0}")]
    NegativeOrder(String),
}

/// The affine value `c0 + cd·d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DimExpr {
    #[serde(with = "serde_rational")]
    pub c0: Rational,
    #[serde(with = "serde_rational")]
    pub cd: Rational,
}

impl DimExpr {
    pub fn new(c0: Rational, cd: Rational) -> Self {
        Self { c0, cd }
    }

    pub fn constant(c0: Rational) -> Self {
        Self { c0, cd: Rational::zero() }
    }

    pub fn zero() -> Self {
        Self::constant(Rational::zero())
    }

    /// The symbol `d` itself.
    pub fn dim() -> Self {
        Self { c0: Rational::zero(), cd: Rational::one() }
    }

    pub fn is_constant(&self) -> bool {
        self.cd.is_zero()
    }

    pub fn eval(&self, d: i64) -> Rational {
        &self.c0 + &self.cd * Rational::from_integer(BigInt::from(d))
    }

    /// Substitutes a concrete dimension, keeping the result affine.
    pub fn at(&self, d: i64) -> Self {
        Self::constant(self.eval(d))
    }

    /// Sign of the value when it does not depend on the dimension over all
    /// integers `d >= min_dim`; `None` when the sign changes in that range.
    pub fn sign_for_all_dims(&self, min_dim: i64) -> Option<Ordering> {
        let at_min = self.eval(min_dim);
        let zero = Rational::zero();
        if self.cd.is_zero() {
            return Some(at_min.cmp(&zero));
        }
        // Monotone in d; the sign is fixed only if it never crosses zero.
        match (self.cd.is_positive(), at_min.cmp(&zero)) {
            (true, Ordering::Greater) => Some(Ordering::Greater),
            (false, Ordering::Less) => Some(Ordering::Less),
            _ => None,
        }
    }

    /// The dimension where the expression vanishes, if it depends on `d`.
    pub fn root(&self) -> Option<Rational> {
        if self.cd.is_zero() {
            None
        } else {
            Some(-&self.c0 / &self.cd)
        }
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self { c0: &self.c0 * k, cd: &self.cd * k }
    }
}

impl Add for &DimExpr {
    type Output = DimExpr;
    fn add(self, rhs: &DimExpr) -> DimExpr {
        DimExpr { c0: &self.c0 + &rhs.c0, cd: &self.cd + &rhs.cd }
    }
}

impl Add for DimExpr {
    type Output = DimExpr;
    fn add(self, rhs: DimExpr) -> DimExpr {
        &self + &rhs
    }
}

impl Sub for &DimExpr {
    type Output = DimExpr;
    fn sub(self, rhs: &DimExpr) -> DimExpr {
        DimExpr { c0: &self.c0 - &rhs.c0, cd: &self.cd - &rhs.cd }
    }
}

impl Sub for DimExpr {
    type Output = DimExpr;
    fn sub(self, rhs: DimExpr) -> DimExpr {
        &self - &rhs
    }
}

impl Neg for &DimExpr {
    type Output = DimExpr;
    fn neg(self) -> DimExpr {
        DimExpr { c0: -&self.c0, cd: -&self.cd }
    }
}

impl Mul<&Rational> for &DimExpr {
    type Output = DimExpr;
    fn mul(self, k: &Rational) -> DimExpr {
        self.scale(k)
    }
}

impl From<Rational> for DimExpr {
    fn from(r: Rational) -> Self {
        Self::constant(r)
    }
}

/// Renders `c·sym` with canonical spacing: `d`, `3d/2`, `d/2`.
pub(crate) fn format_symbol_coeff(coeff: &Rational, symbol: &str) -> String {
    let abs = coeff.abs();
    let (n, q) = (abs.numer(), abs.denom());
    match (n.is_one(), q.is_one()) {
        (true, true) => symbol.to_string(),
        (false, true) => format!("{n}{symbol}"),
        (true, false) => format!("{symbol}/{q}"),
        (false, false) => format!("{n}{symbol}/{q}"),
    }
}

/// Joins signed terms as `a - b + c`, the first keeping a bare `-`.
pub(crate) fn join_terms(terms: &[(bool, String)]) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (negative, body)) in terms.iter().enumerate() {
        match (i, negative) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(body);
    }
    out
}

impl fmt::Display for DimExpr {
    /// ASCII form used by tables and golden files, e.g. `1 - d/2`, `-1 - d/2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        if !self.c0.is_zero() {
            terms.push((self.c0.is_negative(), format_rational(&self.c0.abs())));
        }
        if !self.cd.is_zero() {
            terms.push((self.cd.is_negative(), format_symbol_coeff(&self.cd, "d")));
        }
        f.write_str(&join_terms(&terms))
    }
}

/// Open bound: regularity β for all β < `sup`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegBound {
    pub sup: DimExpr,
}

impl RegBound {
    pub fn new(sup: DimExpr) -> Self {
        Self { sup }
    }

    pub fn constant(sup: Rational) -> Self {
        Self { sup: DimExpr::constant(sup) }
    }

    /// Rational ordering of the suprema at a concrete dimension.
    pub fn cmp_at(&self, other: &RegBound, d: i64) -> Ordering {
        self.sup.eval(d).cmp(&other.sup.eval(d))
    }

    /// Whether the bound allows some positive β at dimension `d`, i.e. the
    /// object is (almost) a function.
    pub fn reaches_nonnegative_at(&self, d: i64) -> bool {
        !self.sup.eval(d).is_negative()
    }
}

impl fmt::Display for RegBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "beta < {}", self.sup)
    }
}

/// Parabolic scaling `s = (s0, 1, ..., 1)` on `R x T^d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalingInfo {
    pub time_order: Rational,
    pub dim: DimExpr,
}

impl ScalingInfo {
    pub fn new(time_order: Rational, dim: DimExpr) -> Self {
        Self { time_order, dim }
    }

    /// Heat scaling `(2, 1, ..., 1)` with symbolic `d`.
    pub fn heat_symbolic() -> Self {
        Self::new(Rational::from_integer(BigInt::from(2)), DimExpr::dim())
    }

    /// Scaling dimension `|s| = s0 + d`.
    pub fn scaling_dimension(&self) -> DimExpr {
        &DimExpr::constant(self.time_order.clone()) + &self.dim
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoiseKind {
    SpaceTimeWhite,
    SpatialWhite,
}

/// Regularity of `(-Δ)^{α/2} ξ`.
///
/// Space-time white noise sits just below `-|s|/2`; white-in-space noise just
/// below `-d/2`. The lift costs `α` in either case.
pub fn noise_regularity(
    kind: NoiseKind,
    scaling: &ScalingInfo,
    lift_alpha: &Rational,
) -> Result<RegBound, RegularityError> {
    if lift_alpha.is_negative() {
        return Err(RegularityError::NegativeLift(format_rational(lift_alpha)));
    }
    let half = Rational::new(BigInt::from(1), BigInt::from(2));
    let base = match kind {
        NoiseKind::SpaceTimeWhite => -&scaling.scaling_dimension().scale(&half),
        NoiseKind::SpatialWhite => -&scaling.dim.scale(&half),
    };
    Ok(RegBound::new(&base - &DimExpr::constant(lift_alpha.clone())))
}

/// Homogeneity of a formal product: the sum of the factors' homogeneities.
pub fn product_homogeneity(a: &RegBound, b: &RegBound) -> RegBound {
    RegBound::new(&a.sup + &b.sup)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProductStatus {
    Defined(RegBound),
    IllDefined,
}

impl ProductStatus {
    pub fn is_defined(&self) -> bool {
        matches!(self, ProductStatus::Defined(_))
    }
}

/// Analytic product of `C^α x C^β` at a concrete dimension.
///
/// Defined iff `α + β > 0`; the result lies in `C^{min(α, β, α+β)}`. With open
/// bounds a zero sum is never attained, so it is ill-defined.
pub fn product_analytic(a: &RegBound, b: &RegBound, d: i64) -> ProductStatus {
    let x = a.sup.eval(d);
    let y = b.sup.eval(d);
    let sum = &x + &y;
    if !sum.is_positive() {
        return ProductStatus::IllDefined;
    }
    let min = [x, y, sum].into_iter().min().expect("three candidates");
    ProductStatus::Defined(RegBound::constant(min))
}

/// A derivative of order `k` costs `k`.
pub fn apply_derivative(a: &RegBound, k: &Rational) -> Result<RegBound, RegularityError> {
    if k.is_negative() {
        return Err(RegularityError::NegativeOrder(format_rational(k)));
    }
    Ok(RegBound::new(&a.sup - &DimExpr::constant(k.clone())))
}

/// Convolution with the semigroup of a dissipative operator of the given
/// order gains that order.
pub fn schauder_gain(a: &RegBound, order: &Rational) -> Result<RegBound, RegularityError> {
    if order.is_negative() {
        return Err(RegularityError::NegativeOrder(format_rational(order)));
    }
    Ok(RegBound::new(&a.sup + &DimExpr::constant(order.clone())))
}

/// Leray projection and Riesz transforms are order zero.
pub fn zero_order_operator(a: &RegBound) -> RegBound {
    a.clone()
}
