//! The `.spde` equation description language.
//!
//! ```text
//! equation navier_stokes {
//!   dimension d;
//!   unknown u : vector;
//!   diffusion order 2;
//!   noise stwn;
//!   nonlinear { degree 2; outer_deriv 1; projector leray; }
//! }
//! ```
//!
//! Items are semicolon terminated, keywords are ASCII, `#` starts a comment
//! running to the end of the line. Numbers are exact rationals `p` or `p/q`.
//! Nonlinearities keep only what regularity counting needs: the number of
//! factors, derivative orders and zero-order wrappers.

use std::fmt::{self, Write as _};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{
    format_rational, parse_rational, serde_rational, serde_rational_opt, serde_rational_vec,
    Rational,
};
use crate::regularity::{DimExpr, NoiseKind, ScalingInfo};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dimension {
    Symbolic,
    Concrete(i64),
}

impl Dimension {
    pub fn as_expr(&self) -> DimExpr {
        match self {
            Dimension::Symbolic => DimExpr::dim(),
            Dimension::Concrete(d) => DimExpr::constant(Rational::from_integer(BigInt::from(*d))),
        }
    }

    pub fn concrete(&self) -> Option<i64> {
        match self {
            Dimension::Symbolic => None,
            Dimension::Concrete(d) => Some(*d),
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dimension::Symbolic => f.write_str("d"),
            Dimension::Concrete(d) => write!(f, "{d}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnknownRank {
    Scalar,
    Vector,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    #[serde(with = "serde_rational")]
    pub lift_alpha: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Projector {
    Leray,
    Riesz,
}

impl Projector {
    fn keyword(self) -> &'static str {
        match self {
            Projector::Leray => "leray",
            Projector::Riesz => "riesz",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NonlinearTerm {
    pub degree: u32,
    #[serde(with = "serde_rational_vec")]
    pub inner_derivative_orders: Vec<Rational>,
    #[serde(with = "serde_rational")]
    pub outer_derivative_order: Rational,
    pub projectors: Vec<Projector>,
}

impl NonlinearTerm {
    pub fn new(degree: u32) -> Self {
        Self {
            degree,
            inner_derivative_orders: vec![Rational::zero(); degree as usize],
            outer_derivative_order: Rational::zero(),
            projectors: Vec::new(),
        }
    }

    pub fn total_derivative_order(&self) -> Rational {
        self.inner_derivative_orders
            .iter()
            .fold(self.outer_derivative_order.clone(), |acc, k| acc + k)
    }

    pub fn max_inner_derivative(&self) -> Rational {
        self.inner_derivative_orders
            .iter()
            .cloned()
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpdeSpec {
    pub name: String,
    pub dimension: Dimension,
    pub unknown_name: String,
    pub unknown_rank: UnknownRank,
    #[serde(with = "serde_rational")]
    pub diffusion_order: Rational,
    #[serde(with = "serde_rational_opt")]
    pub z1_diffusion_order: Option<Rational>,
    pub noise: NoiseSpec,
    pub nonlinear_terms: Vec<NonlinearTerm>,
}

impl SpdeSpec {
    /// The time weight of the parabolic scaling; tied to the leading operator.
    pub fn scaling_time_order(&self) -> &Rational {
        &self.diffusion_order
    }

    pub fn scaling(&self) -> ScalingInfo {
        ScalingInfo::new(self.diffusion_order.clone(), self.dimension.as_expr())
    }

    /// Order of the operator solving for `z1`: `γ₁` when set, else `γ`.
    pub fn z1_order(&self) -> &Rational {
        self.z1_diffusion_order.as_ref().unwrap_or(&self.diffusion_order)
    }

    pub fn with_dimension(&self, d: i64) -> Self {
        Self { dimension: Dimension::Concrete(d), ..self.clone() }
    }

    /// Overrides one named parameter: `gamma`, `alpha`, `gamma1`, `n`, `d`.
    pub fn with_param(&self, key: &str, value: &Rational) -> Result<Self, ParamError> {
        let mut out = self.clone();
        match key {
            "gamma" => out.diffusion_order = value.clone(),
            "alpha" => out.noise.lift_alpha = value.clone(),
            "gamma1" => out.z1_diffusion_order = Some(value.clone()),
            "n" | "degree" => {
                let n = integer_value(key, value)?;
                let [term] = out.nonlinear_terms.as_mut_slice() else {
                    return Err(ParamError::AmbiguousDegree);
                };
                let first = term.inner_derivative_orders.first().cloned().unwrap_or_default();
                if term.inner_derivative_orders.iter().any(|k| *k != first) {
                    return Err(ParamError::AmbiguousDegree);
                }
                let n = u32::try_from(n).map_err(|_| ParamError::OutOfRange(key.to_string()))?;
                term.degree = n;
                term.inner_derivative_orders = vec![first; n as usize];
            }
            "d" | "dim" | "dimension" => {
                out.dimension = Dimension::Concrete(integer_value(key, value)?);
            }
            other => return Err(ParamError::Unknown(other.to_string())),
        }
        Ok(out)
    }
}

fn integer_value(key: &str, value: &Rational) -> Result<i64, ParamError> {
    if !value.is_integer() {
        return Err(ParamError::NotInteger(key.to_string()));
    }
    value
        .to_integer()
        .to_i64()
        .ok_or_else(|| ParamError::OutOfRange(key.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("unknown parameter `{0}` (expected gamma, alpha, gamma1, n or d)")]
    Unknown(String),
    #[error("parameter `{0}` must be an integer")]
    NotInteger(String),
    #[error("parameter `{0}` out of range")]
    OutOfRange(String),
    #[error("`n` needs exactly one nonlinear term with uniform inner derivatives")]
    AmbiguousDegree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiagnosticCode {
    #[serde(rename = "E_AUX_ORDER")]
    AuxOrder,
    #[serde(rename = "E_NEG_LIFT")]
    NegativeLift,
    #[serde(rename = "E_DIFFUSION_ORDER")]
    DiffusionOrder,
    #[serde(rename = "E_NO_NONLINEARITY")]
    NoNonlinearity,
    #[serde(rename = "E_DEGREE")]
    Degree,
    #[serde(rename = "E_DERIV_COUNT")]
    DerivativeCount,
    #[serde(rename = "E_NEG_DERIV")]
    NegativeDerivative,
    #[serde(rename = "E_DIMENSION")]
    Dimension,
    #[serde(rename = "E_MISSING_ITEM")]
    MissingItem,
    #[serde(rename = "E_DUPLICATE_ITEM")]
    DuplicateItem,
    #[serde(rename = "W_WHITE_IN_TIME_RIESZ")]
    WhiteInTimeRiesz,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::AuxOrder => "E_AUX_ORDER",
            DiagnosticCode::NegativeLift => "E_NEG_LIFT",
            DiagnosticCode::DiffusionOrder => "E_DIFFUSION_ORDER",
            DiagnosticCode::NoNonlinearity => "E_NO_NONLINEARITY",
            DiagnosticCode::Degree => "E_DEGREE",
            DiagnosticCode::DerivativeCount => "E_DERIV_COUNT",
            DiagnosticCode::NegativeDerivative => "E_NEG_DERIV",
            DiagnosticCode::Dimension => "E_DIMENSION",
            DiagnosticCode::MissingItem => "E_MISSING_ITEM",
            DiagnosticCode::DuplicateItem => "E_DUPLICATE_ITEM",
            DiagnosticCode::WhiteInTimeRiesz => "W_WHITE_IN_TIME_RIESZ",
        }
    }
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub message: String,
}

impl Diagnostic {
    fn new(code: DiagnosticCode, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("invalid specification: {}", join_diagnostics(.0))]
    Semantic(Vec<Diagnostic>),
}

impl ParseError {
    pub fn diagnostics(&self) -> Vec<String> {
        match self {
            ParseError::Syntax { .. } => vec![self.to_string()],
            ParseError::Semantic(diags) => diags.iter().map(|d| d.to_string()).collect(),
        }
    }
}

fn join_diagnostics(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

/// Checks every `SpdeSpec` invariant; one diagnostic per violation.
pub fn validate_spec(spec: &SpdeSpec) -> Vec<Diagnostic> {
    use DiagnosticCode as C;
    let mut out = Vec::new();
    if let Dimension::Concrete(d) = spec.dimension {
        if d < 1 {
            out.push(Diagnostic::new(C::Dimension, format!("dimension must be >= 1, got {d}")));
        }
    }
    if spec.diffusion_order.is_negative() {
        out.push(Diagnostic::new(
            C::DiffusionOrder,
            format!("diffusion order must be >= 0, got {}", spec.diffusion_order),
        ));
    }
    if let Some(g1) = &spec.z1_diffusion_order {
        if *g1 < spec.diffusion_order {
            out.push(Diagnostic::new(
                C::AuxOrder,
                format!("aux_z1 order {g1} is below the diffusion order {}", spec.diffusion_order),
            ));
        }
    }
    if spec.noise.lift_alpha.is_negative() {
        out.push(Diagnostic::new(
            C::NegativeLift,
            format!("noise lift must be >= 0, got {}", spec.noise.lift_alpha),
        ));
    }
    if spec.nonlinear_terms.is_empty() {
        out.push(Diagnostic::new(C::NoNonlinearity, "at least one nonlinear term is required"));
    }
    for (i, term) in spec.nonlinear_terms.iter().enumerate() {
        let at = i + 1;
        if term.degree < 2 {
            out.push(Diagnostic::new(
                C::Degree,
                format!("nonlinear term {at}: degree must be >= 2, got {}", term.degree),
            ));
        }
        if term.inner_derivative_orders.len() != term.degree as usize {
            out.push(Diagnostic::new(
                C::DerivativeCount,
                format!(
                    "nonlinear term {at}: {} inner derivative orders for degree {}",
                    term.inner_derivative_orders.len(),
                    term.degree
                ),
            ));
        }
        let negative = term
            .inner_derivative_orders
            .iter()
            .chain(std::iter::once(&term.outer_derivative_order))
            .any(|k| k.is_negative());
        if negative {
            out.push(Diagnostic::new(
                C::NegativeDerivative,
                format!("nonlinear term {at}: derivative orders must be >= 0"),
            ));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LintOptions {
    /// Warn when white-in-time noise drives an equation with Riesz-type
    /// transport, a combination some solution theories exclude.
    pub warn_white_in_time_riesz: bool,
}

pub fn lint_spec(spec: &SpdeSpec, options: LintOptions) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let riesz = spec
        .nonlinear_terms
        .iter()
        .any(|t| t.projectors.contains(&Projector::Riesz));
    if options.warn_white_in_time_riesz && riesz && spec.noise.kind == NoiseKind::SpaceTimeWhite {
        out.push(Diagnostic::new(
            DiagnosticCode::WhiteInTimeRiesz,
            "space-time white noise with a Riesz-transport nonlinearity",
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(String),
    Slash,
    LBrace,
    RBrace,
    Semi,
    Colon,
    Comma,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(s) => write!(f, "`{s}`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Comma => f.write_str("`,`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, column, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    let (mut line, mut column) = (1usize, 1usize);
    while let Some(&(start, c)) = chars.peek() {
        let (tok_line, tok_col) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::CharIndices<'_>>| {
            let (_, c) = chars.next().expect("peeked");
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        };
        match c {
            '\n' | ' ' | '\t' | '\r' => bump(&mut chars),
            '#' => {
                while let Some(&(_, c)) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
            }
            '{' | '}' | ';' | ':' | ',' | '/' => {
                bump(&mut chars);
                let tok = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ';' => Tok::Semi,
                    ':' => Tok::Colon,
                    ',' => Tok::Comma,
                    _ => Tok::Slash,
                };
                out.push(Spanned { tok, line: tok_line, column: tok_col });
            }
            '-' | '0'..='9' => {
                bump(&mut chars);
                let mut end = start + 1;
                while let Some(&(i, c)) = chars.peek() {
                    if !c.is_ascii_digit() {
                        break;
                    }
                    end = i + 1;
                    bump(&mut chars);
                }
                let lit = &text[start..end];
                if lit == "-" {
                    return Err(syntax(tok_line, tok_col, "`-` must be followed by digits"));
                }
                out.push(Spanned { tok: Tok::Int(lit.to_string()), line: tok_line, column: tok_col });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut end = start;
                while let Some(&(i, c)) = chars.peek() {
                    if !(c.is_ascii_alphanumeric() || c == '_') {
                        break;
                    }
                    end = i + 1;
                    bump(&mut chars);
                }
                out.push(Spanned {
                    tok: Tok::Ident(text[start..end].to_string()),
                    line: tok_line,
                    column: tok_col,
                });
            }
            other => {
                return Err(syntax(tok_line, tok_col, format!("unexpected character {other:?}")));
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|s| (s.line, s.column)).unwrap_or(self.end)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, column) = self.here();
        syntax(line, column, message)
    }

    fn next(&mut self, expected: &str) -> Result<Tok, ParseError> {
        match self.toks.get(self.pos) {
            Some(s) => {
                self.pos += 1;
                Ok(s.tok.clone())
            }
            None => Err(self.error(format!("unexpected end of input, expected {expected}"))),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        let found = self.peek().cloned();
        match found {
            Some(t) if t == tok => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.error(format!("expected {tok}, found {t}"))),
            None => Err(self.error(format!("unexpected end of input, expected {tok}"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        let at = self.here();
        match self.next(what)? {
            Tok::Ident(s) => Ok(s),
            t => Err(syntax(at.0, at.1, format!("expected {what}, found {t}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        let at = self.here();
        match self.next(&format!("`{kw}`"))? {
            Tok::Ident(s) if s == kw => Ok(()),
            t => Err(syntax(at.0, at.1, format!("expected `{kw}`, found {t}"))),
        }
    }

    fn int(&mut self, what: &str) -> Result<(String, (usize, usize)), ParseError> {
        let at = self.here();
        match self.next(what)? {
            Tok::Int(s) => Ok((s, at)),
            t => Err(syntax(at.0, at.1, format!("expected {what}, found {t}"))),
        }
    }

    fn rational(&mut self) -> Result<Rational, ParseError> {
        let (num, at) = self.int("a rational number")?;
        let text = if self.peek() == Some(&Tok::Slash) {
            self.pos += 1;
            let (den, _) = self.int("a denominator")?;
            format!("{num}/{den}")
        } else {
            num
        };
        parse_rational(&text).map_err(|e| syntax(at.0, at.1, e.to_string()))
    }
}

#[derive(Default)]
struct Draft {
    dimension: Option<Dimension>,
    unknown: Option<(String, UnknownRank)>,
    diffusion: Option<Rational>,
    aux: Option<Rational>,
    noise: Option<NoiseSpec>,
    terms: Vec<NonlinearTerm>,
    problems: Vec<Diagnostic>,
}

impl Draft {
    fn set<T>(slot: &mut Option<T>, value: T, item: &str, problems: &mut Vec<Diagnostic>) {
        if slot.is_some() {
            problems.push(Diagnostic::new(
                DiagnosticCode::DuplicateItem,
                format!("`{item}` given more than once"),
            ));
        } else {
            *slot = Some(value);
        }
    }
}

/// Parses and validates a specification.
pub fn parse_spec(text: &str) -> Result<SpdeSpec, ParseError> {
    let toks = lex(text)?;
    let end = text.lines().enumerate().last().map_or((1, 1), |(i, l)| (i + 1, l.len() + 1));
    let mut p = Parser { toks, pos: 0, end };
    p.keyword("equation")?;
    let name = p.ident("an equation name")?;
    p.expect(Tok::LBrace)?;

    let mut draft = Draft::default();
    loop {
        match p.peek() {
            Some(Tok::RBrace) => {
                p.pos += 1;
                break;
            }
            None => return Err(p.error("unexpected end of input, expected `}`")),
            _ => parse_item(&mut p, &mut draft)?,
        }
    }
    if p.pos < p.toks.len() {
        return Err(p.error("trailing input after the equation block"));
    }
    finish(name, draft)
}

/// Byte-level entry point; invalid UTF-8 is a syntax error.
pub fn parse_spec_bytes(bytes: &[u8]) -> Result<SpdeSpec, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_spec(text.strip_prefix('\u{feff}').unwrap_or(text)),
        Err(e) => {
            let valid = &bytes[..e.valid_up_to()];
            let line = valid.iter().filter(|&&b| b == b'\n').count() + 1;
            let column = valid.iter().rev().take_while(|&&b| b != b'\n').count() + 1;
            Err(syntax(line, column, "input is not valid UTF-8"))
        }
    }
}

fn parse_item(p: &mut Parser, draft: &mut Draft) -> Result<(), ParseError> {
    let at = p.here();
    let key = p.ident("an item keyword")?;
    match key.as_str() {
        "dimension" => {
            let dim = match p.next("a dimension")? {
                Tok::Ident(_) => Dimension::Symbolic,
                Tok::Int(s) => match s.parse::<i64>() {
                    Ok(d) => Dimension::Concrete(d),
                    Err(_) => return Err(syntax(at.0, at.1, format!("dimension `{s}` out of range"))),
                },
                t => return Err(syntax(at.0, at.1, format!("expected a dimension, found {t}"))),
            };
            Draft::set(&mut draft.dimension, dim, "dimension", &mut draft.problems);
        }
        "unknown" => {
            let name = p.ident("the unknown's name")?;
            p.expect(Tok::Colon)?;
            let rank = match p.ident("`scalar` or `vector`")?.as_str() {
                "scalar" => UnknownRank::Scalar,
                "vector" => UnknownRank::Vector,
                other => return Err(p.error(format!("expected `scalar` or `vector`, found `{other}`"))),
            };
            Draft::set(&mut draft.unknown, (name, rank), "unknown", &mut draft.problems);
        }
        "diffusion" => {
            p.keyword("order")?;
            let r = p.rational()?;
            Draft::set(&mut draft.diffusion, r, "diffusion", &mut draft.problems);
        }
        "aux_z1" => {
            p.keyword("order")?;
            let r = p.rational()?;
            Draft::set(&mut draft.aux, r, "aux_z1", &mut draft.problems);
        }
        "noise" => {
            let kind = match p.ident("a noise kind")?.as_str() {
                "stwn" => NoiseKind::SpaceTimeWhite,
                "spatial_white" => NoiseKind::SpatialWhite,
                other => {
                    return Err(p.error(format!("expected `stwn` or `spatial_white`, found `{other}`")))
                }
            };
            let lift_alpha = if p.peek() == Some(&Tok::Ident("lift".into())) {
                p.pos += 1;
                p.rational()?
            } else {
                Rational::zero()
            };
            Draft::set(&mut draft.noise, NoiseSpec { kind, lift_alpha }, "noise", &mut draft.problems);
        }
        "nonlinear" => {
            let term = parse_nonlinear(p, &mut draft.problems)?;
            draft.terms.push(term);
            return Ok(());
        }
        other => return Err(syntax(at.0, at.1, format!("unknown item `{other}`"))),
    }
    p.expect(Tok::Semi)
}

fn parse_nonlinear(p: &mut Parser, problems: &mut Vec<Diagnostic>) -> Result<NonlinearTerm, ParseError> {
    p.expect(Tok::LBrace)?;
    p.keyword("degree")?;
    let (deg, at) = p.int("the degree")?;
    p.expect(Tok::Semi)?;
    let degree = match deg.parse::<u32>() {
        Ok(n) => n,
        Err(_) => {
            return Err(syntax(at.0, at.1, format!("degree `{deg}` must be a small non-negative integer")))
        }
    };
    let mut inner: Option<Vec<Rational>> = None;
    let mut outer: Option<Rational> = None;
    let mut projectors = Vec::new();
    loop {
        if p.peek() == Some(&Tok::RBrace) {
            p.pos += 1;
            break;
        }
        let key = p.ident("`inner_deriv`, `outer_deriv`, `projector` or `}`")?;
        match key.as_str() {
            "inner_deriv" => {
                let mut orders = vec![p.rational()?];
                while p.peek() == Some(&Tok::Comma) {
                    p.pos += 1;
                    orders.push(p.rational()?);
                }
                Draft::set(&mut inner, orders, "inner_deriv", problems);
            }
            "outer_deriv" => {
                let r = p.rational()?;
                Draft::set(&mut outer, r, "outer_deriv", problems);
            }
            "projector" => {
                let proj = match p.ident("`leray` or `riesz`")?.as_str() {
                    "leray" => Projector::Leray,
                    "riesz" => Projector::Riesz,
                    other => return Err(p.error(format!("expected `leray` or `riesz`, found `{other}`"))),
                };
                if projectors.contains(&proj) {
                    problems.push(Diagnostic::new(
                        DiagnosticCode::DuplicateItem,
                        format!("projector `{}` given more than once", proj.keyword()),
                    ));
                } else {
                    projectors.push(proj);
                }
            }
            other => return Err(p.error(format!("unknown nonlinear item `{other}`"))),
        }
        p.expect(Tok::Semi)?;
    }
    projectors.sort();
    Ok(NonlinearTerm {
        degree,
        inner_derivative_orders: inner.unwrap_or_else(|| vec![Rational::zero(); degree.min(64) as usize]),
        outer_derivative_order: outer.unwrap_or_else(Rational::zero),
        projectors,
    })
}

fn finish(name: String, draft: Draft) -> Result<SpdeSpec, ParseError> {
    let mut problems = draft.problems;
    let missing = |item: &str| Diagnostic::new(DiagnosticCode::MissingItem, format!("missing `{item}` item"));
    if draft.dimension.is_none() {
        problems.push(missing("dimension"));
    }
    if draft.unknown.is_none() {
        problems.push(missing("unknown"));
    }
    if draft.diffusion.is_none() {
        problems.push(missing("diffusion order"));
    }
    if draft.noise.is_none() {
        problems.push(missing("noise"));
    }
    let (Some(dimension), Some((unknown_name, unknown_rank)), Some(diffusion_order), Some(noise)) =
        (draft.dimension, draft.unknown, draft.diffusion, draft.noise)
    else {
        return Err(ParseError::Semantic(problems));
    };
    let spec = SpdeSpec {
        name,
        dimension,
        unknown_name,
        unknown_rank,
        diffusion_order,
        z1_diffusion_order: draft.aux,
        noise,
        nonlinear_terms: draft.terms,
    };
    problems.extend(validate_spec(&spec));
    if problems.is_empty() {
        Ok(spec)
    } else {
        Err(ParseError::Semantic(problems))
    }
}

/// Canonical text of a specification; `parse_spec` inverts it.
pub fn format_spec(spec: &SpdeSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "equation {} {{", spec.name);
    let _ = writeln!(out, "  dimension {};", spec.dimension);
    let rank = match spec.unknown_rank {
        UnknownRank::Scalar => "scalar",
        UnknownRank::Vector => "vector",
    };
    let _ = writeln!(out, "  unknown {} : {rank};", spec.unknown_name);
    let _ = writeln!(out, "  diffusion order {};", format_rational(&spec.diffusion_order));
    if let Some(g1) = &spec.z1_diffusion_order {
        let _ = writeln!(out, "  aux_z1 order {};", format_rational(g1));
    }
    let kind = match spec.noise.kind {
        NoiseKind::SpaceTimeWhite => "stwn",
        NoiseKind::SpatialWhite => "spatial_white",
    };
    if spec.noise.lift_alpha.is_zero() {
        let _ = writeln!(out, "  noise {kind};");
    } else {
        let _ = writeln!(out, "  noise {kind} lift {};", format_rational(&spec.noise.lift_alpha));
    }
    for term in &spec.nonlinear_terms {
        let _ = writeln!(out, "  nonlinear {{");
        let _ = writeln!(out, "    degree {};", term.degree);
        if term.inner_derivative_orders.iter().any(|k| !k.is_zero())
            || term.inner_derivative_orders.len() != term.degree as usize
        {
            let list: Vec<String> = term.inner_derivative_orders.iter().map(format_rational).collect();
            let _ = writeln!(out, "    inner_deriv {};", list.join(", "));
        }
        if !term.outer_derivative_order.is_zero() {
            let _ = writeln!(out, "    outer_deriv {};", format_rational(&term.outer_derivative_order));
        }
        for proj in &term.projectors {
            let _ = writeln!(out, "    projector {};", proj.keyword());
        }
        let _ = writeln!(out, "  }}");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    const NSE: &str = "equation navier_stokes {\n  dimension d;\n  unknown u : vector;\n  diffusion order 2;\n  noise stwn;\n  nonlinear { degree 2; outer_deriv 1; projector leray; }\n}\n";

    #[test]
    fn parses_navier_stokes() {
        let spec = parse_spec(NSE).unwrap();
        assert_eq!(spec.name, "navier_stokes");
        assert_eq!(spec.dimension, Dimension::Symbolic);
        assert_eq!(spec.unknown_rank, UnknownRank::Vector);
        assert_eq!(spec.diffusion_order, int(2));
        assert_eq!(spec.noise.kind, NoiseKind::SpaceTimeWhite);
        let [term] = spec.nonlinear_terms.as_slice() else { panic!("one term") };
        assert_eq!(term.degree, 2);
        assert_eq!(term.outer_derivative_order, int(1));
        assert_eq!(term.projectors, vec![Projector::Leray]);
        assert!(validate_spec(&spec).is_empty());
    }

    #[test]
    fn crlf_and_comments_are_accepted() {
        let text = NSE.replace('\n', "\r\n").replace("noise stwn;", "noise stwn; # additive");
        assert_eq!(parse_spec(&text).unwrap(), parse_spec(NSE).unwrap());
    }

    #[test]
    fn empty_nonlinearity_list_is_semantic_error() {
        let text = "equation e { dimension 2; unknown u : scalar; diffusion order 2; noise stwn; }";
        let ParseError::Semantic(diags) = parse_spec(text).unwrap_err() else { panic!() };
        assert_eq!(diags.iter().map(|d| d.code).collect::<Vec<_>>(), vec![DiagnosticCode::NoNonlinearity]);
    }

    #[test]
    fn aux_order_below_diffusion_is_flagged() {
        let mut spec = parse_spec(NSE).unwrap();
        spec.z1_diffusion_order = Some(rat(3, 2));
        let codes: Vec<_> = validate_spec(&spec).into_iter().map(|d| d.code).collect();
        assert_eq!(codes, vec![DiagnosticCode::AuxOrder]);
    }

    #[test]
    fn negative_lift_is_flagged() {
        let text = NSE.replace("noise stwn;", "noise spatial_white lift -1;");
        let ParseError::Semantic(diags) = parse_spec(&text).unwrap_err() else { panic!() };
        assert_eq!(diags[0].code, DiagnosticCode::NegativeLift);
        assert_eq!(diags[0].code.to_string(), "E_NEG_LIFT");
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_spec("equation e {\n  dimension d\n}").unwrap_err();
        match err {
            ParseError::Syntax { line, column, .. } => assert_eq!((line, column), (3, 1)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_spec("equation e { $ }"), Err(ParseError::Syntax { line: 1, column: 14, .. })));
        assert!(matches!(parse_spec(""), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn duplicates_and_missing_items() {
        let text = "equation e { dimension 1; dimension 2; unknown u : scalar; noise stwn; nonlinear { degree 2; } }";
        let ParseError::Semantic(diags) = parse_spec(text).unwrap_err() else { panic!() };
        let codes: Vec<_> = diags.iter().map(|d| d.code).collect();
        assert!(codes.contains(&DiagnosticCode::DuplicateItem));
        assert!(codes.contains(&DiagnosticCode::MissingItem));
    }

    #[test]
    fn concrete_dimension_and_rationals_print_exactly() {
        let text = NSE
            .replace("dimension d;", "dimension 3;")
            .replace("noise stwn;", "noise stwn lift 5/4;");
        let spec = parse_spec(&text).unwrap();
        let printed = format_spec(&spec);
        assert!(printed.contains("  dimension 3;\n"));
        assert!(printed.contains("lift 5/4;"));
        assert_eq!(parse_spec(&printed).unwrap(), spec);
    }

    #[test]
    fn derivative_count_must_match_degree() {
        let text = NSE.replace("degree 2;", "degree 2; inner_deriv 1;");
        let ParseError::Semantic(diags) = parse_spec(&text).unwrap_err() else { panic!() };
        assert_eq!(diags[0].code, DiagnosticCode::DerivativeCount);
    }

    #[test]
    fn params_override_fields() {
        let spec = parse_spec(NSE).unwrap();
        let s = spec.with_param("gamma", &rat(5, 2)).unwrap().with_param("d", &int(3)).unwrap();
        assert_eq!(s.diffusion_order, rat(5, 2));
        assert_eq!(s.dimension, Dimension::Concrete(3));
        let s = spec.with_param("n", &int(3)).unwrap();
        assert_eq!(s.nonlinear_terms[0].inner_derivative_orders.len(), 3);
        assert!(spec.with_param("d", &rat(1, 2)).is_err());
        assert!(spec.with_param("beta", &int(1)).is_err());
    }

    #[test]
    fn invalid_utf8_is_a_syntax_error() {
        assert!(matches!(parse_spec_bytes(b"equation \xff"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn lint_is_opt_in() {
        let text = NSE.replace("projector leray;", "projector riesz;");
        let spec = parse_spec(&text).unwrap();
        assert!(lint_spec(&spec, LintOptions::default()).is_empty());
        let warned = lint_spec(&spec, LintOptions { warn_white_in_time_riesz: true });
        assert_eq!(warned[0].code, DiagnosticCode::WhiteInTimeRiesz);
    }
}
