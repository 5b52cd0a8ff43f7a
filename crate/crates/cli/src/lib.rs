//! `spdecrit` command-line front end: config resolution, report envelopes,
//! table and JSON rendering, and the drivers for each subcommand.
//!
//! [`run`] is the whole program; `main` only forwards the process arguments
//! and exit code.

pub mod analyze;
pub mod args;
pub mod config;
pub mod envelope;
pub mod error;
pub mod noise_cmd;
pub mod suites;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Serialize;
use spdecrit_core::DEFAULT_LEVELS;

use crate::analyze::{analyze, parse_param, render_table, AnalyzeOptions};
use crate::args::{Cli, Command, Format, NoiseCommand, Suite, TychonovArgs, VerifyArgs};
use crate::config::{check, ConfigFile, Resolver};
use crate::envelope::{Check, Envelope};
use crate::error::{CliError, ExitCode, Result};
use crate::suites::SuitePayload;

/// A finished command, ready to print.
#[derive(Debug, Clone)]
pub struct Rendered {
    pub text: String,
    pub pass: bool,
    /// Where to write `text` instead of stdout.
    pub out: Option<PathBuf>,
}

fn render<P: Serialize>(env: &Envelope<P>, format: Format, table: impl FnOnce(&Envelope<P>) -> String) -> String {
    match format {
        Format::Json => env.to_json() + "\n",
        Format::Table => table(env),
    }
}

fn checks_table(checks: &[Check], pass: bool) -> String {
    let mut out = String::new();
    for c in checks {
        let measured = c.measured.map_or_else(|| "non-finite".to_string(), |m| format!("{m:.6e}"));
        out += &format!("{} {}: {} ({})\n", if c.pass { "PASS" } else { "FAIL" }, c.name, measured, c.threshold);
    }
    out += &format!("result: {}\n", if pass { "PASS" } else { "FAIL" });
    out
}

fn suite_table(env: &Envelope<SuitePayload>) -> String {
    let mut out = format!("suite {}\n", env.payload.suite);
    for (k, v) in &env.payload.measurements {
        let v = v.map_or_else(|| "non-finite".to_string(), |v| format!("{v:.6e}"));
        out += &format!("  {k} = {v}\n");
    }
    out + &checks_table(&env.checks, env.pass)
}

fn parse_region(text: &str) -> Result<[f64; 4]> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| CliError::input(format!("--region expects t0,t1,x0,x1, got `{text}`")))?;
    <[f64; 4]>::try_from(parts).map_err(|_| CliError::input(format!("--region expects four numbers, got `{text}`")))
}

fn out_path(r: &mut Resolver, cli: Option<PathBuf>) -> Result<Option<PathBuf>> {
    let file_value = r.file().get("out").map(PathBuf::from);
    Ok(cli.or(file_value))
}

fn run_analyze(cli: &Cli, a: &args::AnalyzeArgs, file: &ConfigFile) -> Result<Rendered> {
    let mut r = Resolver::new(file);
    r.record("spec", a.spec.display());
    let levels = r.value("levels", a.levels, DEFAULT_LEVELS)?;
    let dim = r.optional("dim", a.dim)?;
    let mut params = Vec::new();
    for (k, v) in file.with_prefix("param") {
        params.push(parse_param(&format!("{k}={v}"))?);
    }
    for text in &a.params {
        params.push(parse_param(text)?);
    }
    for (k, v) in &params {
        r.record(&format!("param.{k}"), spdecrit_core::rational::format_rational(v));
    }
    let warn = r.value("warn_white_in_time_riesz", a.warn_white_in_time_riesz.then_some(true), false)?;
    let format = r.value("format", cli.format, Format::Table)?;
    let out = out_path(&mut r, a.out.clone())?;
    let opts = AnalyzeOptions { spec_path: a.spec.clone(), levels, dim, params, warn_white_in_time_riesz: warn };
    let payload = analyze(&opts)?;
    let env = Envelope::new("analyze", r.into_echo(), payload, Vec::new());
    Ok(Rendered { text: render(&env, format, |e| render_table(&e.payload)), pass: env.pass, out })
}

fn suite_envelope(command: &str, r: Resolver, (payload, checks): (SuitePayload, Vec<Check>)) -> Envelope<SuitePayload> {
    Envelope::new(command, r.into_echo(), payload, checks)
}

fn run_verify(cli: &Cli, v: &VerifyArgs, file: &ConfigFile) -> Result<Rendered> {
    let mut r = Resolver::new(file);
    r.record("suite", v.suite.name());
    let format = r.value("format", cli.format, Format::Table)?;
    let out = out_path(&mut r, v.out.clone())?;
    let result = match v.suite {
        Suite::Uniqueness => {
            let n = check::odd_power(r.value("n", v.n, 3)?)?;
            let dim = check::numerics_dim(r.value("dim", v.dim, 1)?)?;
            let grid = check::grid(r.value("grid", v.grid, 256)?)?;
            let dt = check::positive("dt", r.value("dt", v.dt, 1e-4)?)?;
            let tmax = check::positive("tmax", r.value("tmax", v.tmax, 1.0)?)?;
            let seed = r.seed(cli.seed)?;
            suites::uniqueness(&suites::UniquenessParams { n, dim, grid, dt, tmax, seed })?
        }
        Suite::Inequality => {
            let powers = match r.optional("n", v.n)? {
                Some(n) => vec![check::odd_power(n)?],
                None => vec![3, 5, 7, 9],
            };
            r.record("n", powers.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","));
            let samples = check::in_range("samples", r.value("samples", v.samples, 1_000_000)?, 1, 1_000_000_000)?;
            let seed = r.seed(cli.seed)?;
            suites::inequality(&suites::InequalityParams { powers, samples, seed, bound: 10.0 })?
        }
        Suite::Steklov => {
            let series = check::in_range("count", r.value("count", v.count, 100)?, 1, 100_000)?;
            let n = check::odd_power(r.value("n", v.n, 3)?)?;
            let seed = r.seed(cli.seed)?;
            suites::steklov(&suites::SteklovParams { series, n, seed })?
        }
        Suite::Tychonov => {
            return run_tychonov_with(
                cli,
                &TychonovArgs { alpha: v.alpha, terms: v.terms, region: v.region.clone(), out: v.out.clone() },
                file,
                "verify",
                Some(r),
            )
        }
        Suite::Noise => {
            let dim = check::numerics_dim(r.value("dim", v.dim, 1)?)?;
            let grid = check::grid(r.value("grid", v.grid, if dim == 1 { 4096 } else { 256 })?)?;
            let seeds = check::in_range("count", r.value("count", v.count, 16)?, 1, 10_000)?;
            let tmax = check::positive("tmax", r.value("tmax", v.tmax, 1.0)?)?;
            let seed = r.seed(cli.seed)?;
            suites::noise(&suites::NoiseParams { dim, grid, seeds, seed, tmax })?
        }
        Suite::Bony => {
            let grid = check::grid(r.value("grid", v.grid, 4096)?)?;
            let seed = r.seed(cli.seed)?;
            suites::bony(&suites::BonyParams { grid, seed })?
        }
    };
    let env = suite_envelope("verify", r, result);
    Ok(Rendered { text: render(&env, format, suite_table), pass: env.pass, out })
}

fn run_tychonov_with(
    cli: &Cli,
    t: &TychonovArgs,
    file: &ConfigFile,
    command: &str,
    resolver: Option<Resolver>,
) -> Result<Rendered> {
    let mut r = resolver.unwrap_or_else(|| Resolver::new(file));
    let format = r.value("format", cli.format, Format::Table)?;
    let out = out_path(&mut r, t.out.clone())?;
    let alpha = check::in_range("alpha", r.value("alpha", t.alpha, 2)?, 2, 16)?;
    let terms = check::in_range("terms", r.value("terms", t.terms, 30)?, 0, 400)?;
    let region = parse_region(&r.value("region", t.region.clone(), "0.5,1,-1,1".to_string())?)?;
    let result = suites::tychonov(&suites::TychonovParams { alpha, terms, region })?;
    let env = suite_envelope(command, r, result);
    Ok(Rendered { text: render(&env, format, suite_table), pass: env.pass, out })
}

fn run_noise(cli: &Cli, s: &args::SampleArgs, file: &ConfigFile) -> Result<Rendered> {
    let mut r = Resolver::new(file);
    let format = r.value("format", cli.format, Format::Table)?;
    let dim = check::numerics_dim(r.value("dim", s.dim, 1)?)?;
    let grid = check::grid(r.value("grid", s.grid, 4096)?)?;
    let tmax = check::positive("tmax", r.value("tmax", s.tmax, 1.0)?)?;
    let steps = check::in_range("steps", r.value("steps", s.steps, 4)?, 1, 100_000)?;
    let seed = r.seed(cli.seed)?;
    let estimate = r.value("estimate", s.estimate.then_some(true), false)?;
    let out = r.value("out", s.out.as_ref().map(|p| p.display().to_string()), format!("noise-{seed}"))?;
    let payload = noise_cmd::sample(&noise_cmd::SampleParams {
        dim,
        grid,
        seed,
        tmax,
        steps,
        estimate,
        out: PathBuf::from(out),
    })?;
    let env = Envelope::new("noise sample", r.into_echo(), payload, Vec::new());
    let text = render(&env, format, |e| {
        let mut t = format!("wrote {} snapshots to {}\n", e.payload.snapshots, e.payload.out);
        if let Some(x) = e.payload.exponent {
            t += &format!("fitted Holder exponent: {x:.4}\n");
        }
        t
    });
    Ok(Rendered { text, pass: true, out: None })
}

/// Parses arguments and runs one command.
pub fn execute(cli: &Cli) -> Result<Rendered> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match &cli.command {
        Command::Analyze(a) => run_analyze(cli, a, &file),
        Command::Verify(v) => run_verify(cli, v, &file),
        Command::Noise { command: NoiseCommand::Sample(s) } => run_noise(cli, s, &file),
        Command::Tychonov(t) => run_tychonov_with(cli, t, &file, "tychonov", None),
    }
}

fn write_report(path: &Path, text: &str) -> Result<()> {
    spdecrit_numerics::snapshot::write_atomic(path, text.as_bytes())
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// The whole program: returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 { write!(stdout, "{}", e.render()) } else { write!(stderr, "{}", e.render()) };
            return code;
        }
    };
    let outcome = execute(&cli).and_then(|r| {
        match &r.out {
            Some(path) => write_report(path, &r.text)?,
            None => {
                stdout.write_all(r.text.as_bytes()).map_err(CliError::from)?;
            }
        }
        Ok(r.pass)
    });
    match outcome {
        Ok(true) => ExitCode::Success as i32,
        Ok(false) => ExitCode::CheckFailed as i32,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code() as i32
        }
    }
}
