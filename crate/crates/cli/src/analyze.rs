//! `spdecrit analyze`: tree expansion of a specification file.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use spdecrit_core::dsl::{lint_spec, LintOptions};
use spdecrit_core::rational::parse_rational;
use spdecrit_core::{expand, gain_per_step, parse_spec_bytes, DimExpr, Rational, MAX_LEVELS};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOptions {
    pub spec_path: PathBuf,
    pub levels: usize,
    pub dim: Option<i64>,
    /// Applied in order, so later values win.
    pub params: Vec<(String, Rational)>,
    pub warn_white_in_time_riesz: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowOut {
    pub level: usize,
    pub terms: Vec<String>,
    pub forcing: DimExpr,
    pub object: DimExpr,
    pub remainder: DimExpr,
    pub renorm: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyzePayload {
    pub spec: String,
    pub dimension: String,
    pub levels: usize,
    pub stopped: bool,
    pub rows: Vec<RowOut>,
    pub gain: Option<DimExpr>,
    /// Scaling exponent in the free parameters, e.g. `-2 + 2gamma - alpha`.
    pub scaling_exponent: Option<String>,
    pub scaling_bound: Option<DimExpr>,
    pub scaling_per_term: Vec<String>,
    pub classification: Option<String>,
    pub renormalization: Vec<String>,
    pub warnings: Vec<String>,
}

/// Parses `name=value` with a rational value.
pub fn parse_param(text: &str) -> Result<(String, Rational)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| CliError::input(format!("--param expects name=value, got `{text}`")))?;
    let value = parse_rational(v).map_err(|e| CliError::input(format!("--param {k}: {e}")))?;
    Ok((k.trim().to_string(), value))
}

pub fn analyze(opts: &AnalyzeOptions) -> Result<AnalyzePayload> {
    if !(1..=MAX_LEVELS).contains(&opts.levels) {
        return Err(CliError::input(format!("--levels must lie in [1, {MAX_LEVELS}], got {}", opts.levels)));
    }
    let bytes = std::fs::read(&opts.spec_path)
        .map_err(|e| CliError::Io(format!("{}: {e}", opts.spec_path.display())))?;
    let mut spec = parse_spec_bytes(&bytes).map_err(|e| CliError::Input(e.diagnostics()))?;
    for (k, v) in &opts.params {
        spec = spec.with_param(k, v).map_err(|e| CliError::input(format!("--param {k}: {e}")))?;
    }
    if let Some(d) = opts.dim {
        if d < 1 {
            return Err(CliError::input(format!("--dim must be a positive integer, got {d}")));
        }
        spec = spec.with_dimension(d);
    }
    let report = expand(&spec, opts.levels).map_err(|e| CliError::input(e.to_string()))?;
    let lint = lint_spec(&spec, LintOptions { warn_white_in_time_riesz: opts.warn_white_in_time_riesz });
    let mut warnings: Vec<String> = lint.iter().map(|d| d.to_string()).collect();
    warnings.extend(report.warnings.iter().cloned());
    let rows = report
        .rows
        .iter()
        .map(|r| RowOut {
            level: r.level,
            terms: r.terms.clone(),
            forcing: r.forcing.sup.clone(),
            object: r.object.sup.clone(),
            remainder: r.remainder.sup.clone(),
            renorm: r.renorm.clone(),
        })
        .collect();
    Ok(AnalyzePayload {
        spec: report.spec_name.clone(),
        dimension: report.dimension.to_string(),
        levels: opts.levels,
        stopped: report.stopped,
        rows,
        gain: gain_per_step(&report).ok(),
        scaling_exponent: report.scaling.as_ref().map(|s| s.symbolic.to_string()),
        scaling_bound: report.scaling.as_ref().map(|s| s.bound.clone()),
        scaling_per_term: report.scaling_per_term.iter().map(|s| s.bound.to_string()).collect(),
        classification: report.classification.as_ref().map(|c| c.to_string()),
        renormalization: report.renormalization.clone(),
        warnings,
    })
}

/// Plain ASCII table.
pub fn render_table(p: &AnalyzePayload) -> String {
    let header = ["level", "forcing", "object", "most singular terms"];
    let cells: Vec<[String; 4]> = p
        .rows
        .iter()
        .map(|r| [r.level.to_string(), r.forcing.to_string(), r.object.to_string(), r.terms.join("; ")])
        .collect();
    let width = |i: usize| cells.iter().map(|c| c[i].len()).chain([header[i].len()]).max().unwrap_or(0);
    let widths = [width(0), width(1), width(2)];
    let line = |c: [&str; 4]| {
        format!("{:<w0$}  {:<w1$}  {:<w2$}  {}", c[0], c[1], c[2], c[3], w0 = widths[0], w1 = widths[1], w2 = widths[2])
            .trim_end()
            .to_string()
    };
    let dim = if p.dimension == "d" { "symbolic d".to_string() } else { format!("d = {}", p.dimension) };
    let mut out = vec![format!("equation {} ({dim}, {} levels)", p.spec, p.levels)];
    out.push(line(header));
    for c in &cells {
        out.push(line([&c[0], &c[1], &c[2], &c[3]]));
    }
    if p.stopped {
        out.push(format!("stopped after level {}: remaining objects are functions", p.rows.len()));
    }
    let or_none = |s: Option<String>| s.unwrap_or_else(|| "n/a".into());
    out.push(format!("gain per step: {}", or_none(p.gain.as_ref().map(|g| g.to_string()))));
    match (&p.scaling_exponent, &p.scaling_bound) {
        (Some(sym), Some(bound)) => out.push(format!("scaling exponent: {sym} = {bound}")),
        _ => out.push(format!("scaling exponent per term: {}", p.scaling_per_term.join(", "))),
    }
    out.push(format!("classification: {}", or_none(p.classification.clone())));
    if !p.renormalization.is_empty() {
        out.push(format!("needs renormalization: {}", p.renormalization.join("; ")));
    }
    for w in &p.warnings {
        out.push(format!("warning: {w}"));
    }
    out.join("\n") + "\n"
}
