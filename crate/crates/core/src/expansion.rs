//! Da Prato–Debussche tree expansion.
//!
//! Starting from `z1`, the linear solution driven by the noise, each level
//! collects the products of already constructed objects that enter the
//! equation for the remainder, keeps the most singular ones, and solves the
//! linear equation they force. Products are grouped by perturbative order
//! (number of noise leaves); the lowest order not yet absorbed is expanded
//! next, and within it every term of minimal homogeneity is kept.
//!
//! With symbolic `d` only homogeneity sums are used. At a concrete `d` every
//! product is also checked with the analytic product rule and ill-defined
//! ones are reported as needing renormalization.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{validate_spec, Dimension, Projector, SpdeSpec, UnknownRank};
use crate::rational::{format_rational, serde_rational, Rational};
use crate::regularity::{
    noise_regularity, product_analytic, DimExpr, ProductStatus, RegBound, RegularityError,
};
use crate::scaling::{scaling_exponent, ScalingError, ScalingExponent};

pub const DEFAULT_LEVELS: usize = 4;
pub const MAX_LEVELS: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpansionError {
    #[error("E_LEVELS: max_levels must be in [1, {MAX_LEVELS}], got {0}")]
    Levels(usize),
    #[error("E_INVALID_SPEC: {0}")]
    InvalidSpec(String),
    #[error("E_REGULARITY: {0}")]
    Regularity(#[from] RegularityError),
    #[error("E_TOO_FEW_LEVELS: a gain needs at least two levels")]
    TooFewLevels,
    #[error("E_NONCONSTANT_GAIN: consecutive gains differ ({0})")]
    NonconstantGain(String),
}

impl ExpansionError {
    pub fn code(&self) -> &'static str {
        match self {
            ExpansionError::Levels(_) => "E_LEVELS",
            ExpansionError::InvalidSpec(_) => "E_INVALID_SPEC",
            ExpansionError::Regularity(_) => "E_REGULARITY",
            ExpansionError::TooFewLevels => "E_TOO_FEW_LEVELS",
            ExpansionError::NonconstantGain(_) => "E_NONCONSTANT_GAIN",
        }
    }
}

/// One factor of a product: an object, possibly differentiated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub level: usize,
    #[serde(with = "serde_rational")]
    pub inner_derivative: Rational,
    /// Regularity of the factor after differentiation.
    pub regularity: DimExpr,
}

impl Factor {
    pub fn label(&self) -> String {
        let z = format!("z{}", self.level);
        if self.inner_derivative.is_zero() {
            z
        } else if self.inner_derivative.is_one() {
            format!("D {z}")
        } else {
            format!("D^{} {z}", format_rational(&self.inner_derivative))
        }
    }
}

/// A formal product of lower objects, with the term's outer operations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProductTerm {
    /// Index of the nonlinear term of the specification it comes from.
    pub term: usize,
    pub factors: Vec<Factor>,
    #[serde(with = "serde_rational")]
    pub outer_derivative: Rational,
    pub projectors: Vec<Projector>,
    pub vector: bool,
    pub homogeneity: RegBound,
}

impl ProductTerm {
    /// The bare product, e.g. `z2 (x) z1` or `D z1 * D z1`.
    pub fn product_label(&self) -> String {
        let sep = if self.vector { " (x) " } else { " * " };
        self.factors.iter().map(Factor::label).collect::<Vec<_>>().join(sep)
    }

    /// Full rendering with outer derivative and zero-order wrappers.
    pub fn label(&self) -> String {
        wrap(self, &self.product_label())
    }

    /// Analytic status of the product at a concrete dimension, folding the
    /// factors left to right.
    pub fn analytic_status(&self, d: i64) -> ProductStatus {
        let mut iter = self.factors.iter().map(|f| RegBound::new(f.regularity.at(d)));
        let Some(first) = iter.next() else {
            return ProductStatus::IllDefined;
        };
        let mut acc = first;
        for next in iter {
            match product_analytic(&acc, &next, d) {
                ProductStatus::Defined(b) => acc = b,
                ProductStatus::IllDefined => return ProductStatus::IllDefined,
            }
        }
        ProductStatus::Defined(acc)
    }
}

fn wrap(term: &ProductTerm, inner: &str) -> String {
    let k = &term.outer_derivative;
    let mut body = if k.is_zero() {
        if term.projectors.is_empty() {
            inner.to_string()
        } else {
            format!("({inner})")
        }
    } else if k.is_one() && term.vector {
        format!("div({inner})")
    } else if k.is_one() {
        format!("D({inner})")
    } else {
        format!("D^{}({inner})", format_rational(k))
    };
    for p in term.projectors.iter().rev() {
        let prefix = match p {
            Projector::Leray => "P_L",
            Projector::Riesz => "R",
        };
        body = format!("{prefix} {body}");
    }
    body
}

/// Groups products of the same nonlinear term under one wrapper:
/// `div(z2 (x) z1 + z1 (x) z2)`.
pub fn group_labels(products: &[ProductTerm]) -> Vec<String> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < products.len() {
        let mut j = i;
        while j < products.len() && products[j].term == products[i].term {
            j += 1;
        }
        let inner: Vec<String> = products[i..j].iter().map(ProductTerm::product_label).collect();
        out.push(wrap(&products[i], &inner.join(" + ")));
        i = j;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionRow {
    pub level: usize,
    /// Rendered most singular terms of the forcing.
    pub terms: Vec<String>,
    pub products: Vec<ProductTerm>,
    pub forcing: RegBound,
    pub object: RegBound,
    /// Regularity of the remainder once this level is subtracted.
    pub remainder: RegBound,
    /// Forcing products needing renormalization (concrete dimension only).
    pub renorm: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Subcritical,
    Critical,
    Supercritical,
    /// Subcritical exactly when every listed expression is positive.
    ConditionOnDim(Vec<DimExpr>),
}

impl Classification {
    fn from_sign(value: &Rational) -> Self {
        match value.cmp(&Rational::zero()) {
            Ordering::Greater => Classification::Subcritical,
            Ordering::Equal => Classification::Critical,
            Ordering::Less => Classification::Supercritical,
        }
    }

    /// Classification of an exponent or gain expression.
    pub fn from_expr(e: &DimExpr) -> Self {
        if e.is_constant() {
            Self::from_sign(&e.c0)
        } else {
            Classification::ConditionOnDim(vec![e.clone()])
        }
    }

    /// Resolves a dimension condition at a concrete `d`.
    pub fn at(&self, d: i64) -> Self {
        match self {
            Classification::ConditionOnDim(exprs) => {
                let min = exprs.iter().map(|e| e.eval(d)).min().unwrap_or_else(Rational::zero);
                Self::from_sign(&min)
            }
            other => other.clone(),
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Subcritical => f.write_str("Subcritical"),
            Classification::Critical => f.write_str("Critical"),
            Classification::Supercritical => f.write_str("Supercritical"),
            Classification::ConditionOnDim(exprs) => {
                let parts: Vec<String> = exprs.iter().map(|e| format!("{e} > 0")).collect();
                write!(f, "ConditionOnDim({})", parts.join(" and "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalityReport {
    pub spec_name: String,
    pub dimension: Dimension,
    pub rows: Vec<ExpansionRow>,
    /// The next most singular products, not expanded.
    pub pending: Vec<ProductTerm>,
    /// True when the stopping rule fired before `max_levels`.
    pub stopped: bool,
    pub gain: Option<DimExpr>,
    pub scaling: Option<ScalingExponent>,
    pub scaling_per_term: Vec<ScalingExponent>,
    pub classification: Option<Classification>,
    /// All products needing renormalization (concrete dimension only).
    pub renormalization: Vec<String>,
    pub warnings: Vec<String>,
}

impl CriticalityReport {
    pub fn all_products(&self) -> impl Iterator<Item = &ProductTerm> {
        self.rows.iter().flat_map(|r| r.products.iter()).chain(self.pending.iter())
    }
}

struct Object {
    order: u64,
    reg: DimExpr,
}

/// One candidate: a multiset of object indices (descending) for a term.
type Multiset = (usize, Vec<usize>);

struct CandidateSet {
    order: u64,
    homogeneity: DimExpr,
    multisets: Vec<Multiset>,
}

/// Total order on homogeneities: exact at a concrete dimension; at symbolic
/// `d` by value at `d = 1`, then by slope.
fn cmp_expr(a: &DimExpr, b: &DimExpr) -> Ordering {
    a.eval(1).cmp(&b.eval(1)).then_with(|| a.cd.cmp(&b.cd))
}

fn multisets_with_order(
    objects: &[Object],
    degree: usize,
    target: u64,
    max_index: usize,
    prefix: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    let used: u64 = prefix.iter().map(|&i| objects[i].order).sum();
    if prefix.len() == degree {
        if used == target {
            out.push(prefix.clone());
        }
        return;
    }
    let remaining_slots = (degree - prefix.len()) as u64;
    for i in (0..=max_index).rev() {
        let o = objects[i].order;
        // Orders are non-decreasing in the index; later slots use at least order of z1.
        if used + o + (remaining_slots - 1) * objects[0].order > target {
            continue;
        }
        if used + o * remaining_slots < target {
            break;
        }
        prefix.push(i);
        multisets_with_order(objects, degree, target, i, prefix, out);
        prefix.pop();
    }
}

struct Engine<'a> {
    spec: &'a SpdeSpec,
    gamma: DimExpr,
    objects: Vec<Object>,
    absorbed: BTreeSet<Multiset>,
}

impl Engine<'_> {
    fn homogeneity(&self, (t, ms): &Multiset) -> DimExpr {
        let term = &self.spec.nonlinear_terms[*t];
        let mut h = DimExpr::constant(-term.total_derivative_order());
        for &i in ms {
            h = &h + &self.objects[i].reg;
        }
        h
    }

    fn next_candidates(&self) -> CandidateSet {
        let min_order = self.objects[0].order;
        let max_order = self.objects.last().expect("z1").order;
        let max_degree = self.spec.nonlinear_terms.iter().map(|t| t.degree).max().unwrap_or(2) as u64;
        for target in min_order..=max_degree * max_order {
            let mut found: Vec<(Multiset, DimExpr)> = Vec::new();
            for (t, term) in self.spec.nonlinear_terms.iter().enumerate() {
                let mut sets = Vec::new();
                let top = self.objects.len() - 1;
                multisets_with_order(&self.objects, term.degree as usize, target, top, &mut Vec::new(), &mut sets);
                sets.sort();
                for ms in sets {
                    let key = (t, ms);
                    if !self.absorbed.contains(&key) {
                        let h = self.homogeneity(&key);
                        found.push((key, h));
                    }
                }
            }
            if let Some(min) = found.iter().map(|(_, h)| h.clone()).min_by(cmp_expr) {
                let multisets = found
                    .into_iter()
                    .filter(|(_, h)| cmp_expr(h, &min) == Ordering::Equal)
                    .map(|(k, _)| k)
                    .collect();
                return CandidateSet { order: target, homogeneity: min, multisets };
            }
        }
        unreachable!("products with the newest object are never absorbed")
    }

    /// Distinct ordered assignments of a multiset to the term's slots.
    fn products(&self, (t, ms): &Multiset) -> Vec<ProductTerm> {
        let term = &self.spec.nonlinear_terms[*t];
        let vector = self.spec.unknown_rank == UnknownRank::Vector;
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for perm in distinct_permutations_desc(ms) {
            if !vector {
                // Scalar products commute: slots with equal derivative orders are interchangeable.
                let mut key: Vec<(Rational, Vec<usize>)> = Vec::new();
                for (slot, &obj) in perm.iter().enumerate() {
                    let k = &term.inner_derivative_orders[slot];
                    match key.iter_mut().find(|(kk, _)| kk == k) {
                        Some((_, v)) => v.push(obj),
                        None => key.push((k.clone(), vec![obj])),
                    }
                }
                for (_, v) in key.iter_mut() {
                    v.sort();
                }
                key.sort();
                if !seen.insert(key) {
                    continue;
                }
            }
            let factors = perm
                .iter()
                .zip(&term.inner_derivative_orders)
                .map(|(&obj, k)| Factor {
                    level: obj + 1,
                    inner_derivative: k.clone(),
                    regularity: &self.objects[obj].reg - &DimExpr::constant(k.clone()),
                })
                .collect();
            out.push(ProductTerm {
                term: *t,
                factors,
                outer_derivative: term.outer_derivative_order.clone(),
                projectors: term.projectors.clone(),
                vector,
                homogeneity: RegBound::new(self.homogeneity(&(*t, ms.clone()))),
            });
        }
        out
    }

    fn products_of(&self, set: &CandidateSet) -> Vec<ProductTerm> {
        set.multisets.iter().flat_map(|m| self.products(m)).collect()
    }
}

/// Distinct permutations in descending lexicographic order.
fn distinct_permutations_desc(ms: &[usize]) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = ms.to_vec();
    cur.sort_unstable_by(|a, b| b.cmp(a));
    let mut out = vec![cur.clone()];
    // Previous permutation in lexicographic order.
    loop {
        let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] > cur[i]) else {
            return out;
        };
        let pivot = i - 1;
        let j = (i..cur.len()).rev().find(|&j| cur[j] < cur[pivot]).expect("exists");
        cur.swap(pivot, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

fn renorm_labels<'a>(products: impl IntoIterator<Item = &'a ProductTerm>, d: i64) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for p in products {
        if !p.analytic_status(d).is_defined() {
            let label = p.label();
            if !out.contains(&label) {
                out.push(label);
            }
        }
    }
    out
}

enum StopVerdict {
    Stop,
    Continue,
    Undecided,
}

fn stop_verdict(newest: &DimExpr, max_inner: &Rational, dim: &Dimension) -> StopVerdict {
    let margin = newest - &DimExpr::constant(max_inner.clone());
    match dim {
        Dimension::Concrete(d) => {
            if margin.eval(*d).is_negative() {
                StopVerdict::Continue
            } else {
                StopVerdict::Stop
            }
        }
        Dimension::Symbolic => match margin.sign_for_all_dims(1) {
            Some(Ordering::Greater) => StopVerdict::Stop,
            Some(Ordering::Equal) if !margin.cd.is_negative() => StopVerdict::Stop,
            Some(Ordering::Less) => StopVerdict::Continue,
            _ if !margin.cd.is_negative() && !margin.eval(1).is_negative() => StopVerdict::Stop,
            _ => StopVerdict::Undecided,
        },
    }
}

/// Runs the expansion to at most `max_levels` objects.
pub fn expand(spec: &SpdeSpec, max_levels: usize) -> Result<CriticalityReport, ExpansionError> {
    if !(1..=MAX_LEVELS).contains(&max_levels) {
        return Err(ExpansionError::Levels(max_levels));
    }
    let diags = validate_spec(spec);
    if !diags.is_empty() {
        let text: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
        return Err(ExpansionError::InvalidSpec(text.join("; ")));
    }

    let forcing1 = noise_regularity(spec.noise.kind, &spec.scaling(), &spec.noise.lift_alpha)?;
    let z1 = &forcing1.sup + &DimExpr::constant(spec.z1_order().clone());
    let mut engine = Engine {
        spec,
        gamma: DimExpr::constant(spec.diffusion_order.clone()),
        objects: vec![Object { order: 1, reg: z1.clone() }],
        absorbed: BTreeSet::new(),
    };
    let concrete = spec.dimension.concrete();
    let max_inner = spec
        .nonlinear_terms
        .iter()
        .map(|t| t.max_inner_derivative())
        .max()
        .unwrap_or_else(Rational::zero);

    let noise_label = if spec.noise.lift_alpha.is_zero() {
        "xi".to_string()
    } else {
        let half = &spec.noise.lift_alpha / Rational::from_integer(BigInt::from(2));
        format!("(-Delta)^({}) xi", format_rational(&half))
    };
    let mut rows = vec![ExpansionRow {
        level: 1,
        terms: vec![noise_label],
        products: Vec::new(),
        forcing: forcing1,
        object: RegBound::new(z1),
        remainder: RegBound::new(DimExpr::zero()),
        renorm: Vec::new(),
    }];

    let mut undecided = false;
    let stopped;
    let pending = loop {
        let next = engine.next_candidates();
        let remainder = &next.homogeneity + &engine.gamma;
        let level = rows.len();
        let last = rows.last_mut().expect("row");
        last.remainder = RegBound::new(remainder.clone());
        let verdict = stop_verdict(&last.object.sup, &max_inner, &spec.dimension);
        if matches!(verdict, StopVerdict::Undecided) {
            undecided = true;
        }
        let fires = matches!(verdict, StopVerdict::Stop) && (level >= 2 || max_levels == 1);
        if fires || level >= max_levels {
            stopped = fires && level < max_levels;
            break engine.products_of(&next);
        }
        let products = engine.products_of(&next);
        let renorm = concrete.map(|d| renorm_labels(&products, d)).unwrap_or_default();
        for m in &next.multisets {
            engine.absorbed.insert(m.clone());
        }
        engine.objects.push(Object { order: next.order, reg: remainder.clone() });
        rows.push(ExpansionRow {
            level: level + 1,
            terms: group_labels(&products),
            products,
            forcing: RegBound::new(next.homogeneity),
            object: RegBound::new(remainder),
            remainder: RegBound::new(DimExpr::zero()),
            renorm,
        });
    };

    let mut report = CriticalityReport {
        spec_name: spec.name.clone(),
        dimension: spec.dimension.clone(),
        rows,
        pending,
        stopped,
        gain: None,
        scaling: None,
        scaling_per_term: Vec::new(),
        classification: None,
        renormalization: Vec::new(),
        warnings: Vec::new(),
    };
    if let Some(d) = concrete {
        report.renormalization = renorm_labels(report.all_products(), d);
    }
    let scaling = scaling_exponent(spec);
    match &scaling {
        Ok(e) => {
            report.scaling = Some(e.clone());
            report.scaling_per_term = vec![e.clone()];
        }
        Err(ScalingError::MultiTerm { per_term }) => {
            report.scaling_per_term = per_term.clone();
            report.warnings.push(scaling.clone().unwrap_err().to_string());
        }
        Err(e) => report.warnings.push(e.to_string()),
    }
    let per_term_condition = || {
        let exprs: Vec<DimExpr> = report.scaling_per_term.iter().map(|e| e.bound.clone()).collect();
        match concrete {
            Some(d) => Classification::ConditionOnDim(exprs).at(d),
            None => Classification::ConditionOnDim(exprs),
        }
    };
    let gain = gain_per_step(&report);
    let classification = match &gain {
        Ok(g) => Some(Classification::from_expr(g)),
        Err(ExpansionError::TooFewLevels) if !report.scaling_per_term.is_empty() => {
            Some(per_term_condition()).map(simplify)
        }
        Err(ExpansionError::NonconstantGain(_)) if undecided && concrete.is_none() => {
            report.warnings.push(format!(
                "E_SYMBOLIC_STOP: stopping rule undecided for symbolic d after {} levels",
                report.rows.len()
            ));
            let last = &report.rows[report.rows.len() - 1].object.sup - &report.rows[report.rows.len() - 2].object.sup;
            Some(Classification::ConditionOnDim(vec![last]))
        }
        Err(ExpansionError::NonconstantGain(_)) if report.scaling.is_none() && !report.scaling_per_term.is_empty() => {
            Some(per_term_condition()).map(simplify)
        }
        Err(_) => None,
    };
    report.gain = gain.ok();
    report.classification = classification;
    Ok(report)
}

/// Collapses a single dimension-independent condition to its sign.
fn simplify(c: Classification) -> Classification {
    match &c {
        Classification::ConditionOnDim(exprs) if exprs.iter().all(DimExpr::is_constant) => {
            let min = exprs.iter().map(|e| e.c0.clone()).min().unwrap_or_else(Rational::zero);
            Classification::from_sign(&min)
        }
        _ => c,
    }
}

/// Constant difference of consecutive object regularities.
pub fn gain_per_step(report: &CriticalityReport) -> Result<DimExpr, ExpansionError> {
    if report.rows.len() < 2 {
        return Err(ExpansionError::TooFewLevels);
    }
    let diffs: Vec<DimExpr> = report
        .rows
        .windows(2)
        .map(|w| &w[1].object.sup - &w[0].object.sup)
        .collect();
    if diffs.iter().all(|g| *g == diffs[0]) {
        Ok(diffs[0].clone())
    } else {
        let text: Vec<String> = diffs.iter().map(|g| g.to_string()).collect();
        Err(ExpansionError::NonconstantGain(text.join(", ")))
    }
}

/// Classification from a default-depth expansion.
pub fn classify(spec: &SpdeSpec) -> Result<Classification, ExpansionError> {
    let report = expand(spec, DEFAULT_LEVELS)?;
    match report.classification {
        Some(c) => Ok(c),
        None => Err(gain_per_step(&report).expect_err("classification exists when the gain does")),
    }
}

/// Classification of `spec` with its dimension fixed to `d`.
pub fn classify_at(spec: &SpdeSpec, d: i64) -> Result<Classification, ExpansionError> {
    classify(&spec.with_dimension(d))
}

/// Products met during the expansion that are ill-defined at dimension `d`.
pub fn renormalization_flags(report: &CriticalityReport, d: i64) -> Vec<ProductTerm> {
    let mut out: Vec<ProductTerm> = Vec::new();
    for p in report.all_products() {
        if !p.analytic_status(d).is_defined() && !out.contains(p) {
            out.push(p.clone());
        }
    }
    out
}

/// Number of noise leaves in the object of a given level.
pub fn leaf_count(report: &CriticalityReport, level: usize) -> u64 {
    fn count(report: &CriticalityReport, level: usize) -> u64 {
        if level == 1 {
            return 1;
        }
        let row = &report.rows[level - 1];
        row.products[0].factors.iter().map(|f| count(report, f.level)).sum()
    }
    count(report, level)
}

#[cfg(test)]
fn one_half() -> Rational {
    Rational::new(BigInt::one(), BigInt::from(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutations_are_descending() {
        assert_eq!(distinct_permutations_desc(&[0, 2]), vec![vec![2, 0], vec![0, 2]]);
        assert_eq!(distinct_permutations_desc(&[1, 1]), vec![vec![1, 1]]);
        assert_eq!(
            distinct_permutations_desc(&[0, 0, 1]),
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]
        );
    }

    #[test]
    fn classification_display() {
        let c = Classification::ConditionOnDim(vec![DimExpr::new(Rational::from_integer(2.into()), -one_half())]);
        assert_eq!(c.to_string(), "ConditionOnDim(2 - d/2 > 0)");
        assert_eq!(c.at(3), Classification::Subcritical);
        assert_eq!(c.at(4), Classification::Critical);
        assert_eq!(c.at(5), Classification::Supercritical);
    }
}
