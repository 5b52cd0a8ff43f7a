//! `spdecrit noise sample`: writes a `z1` path as binary snapshots.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spdecrit_numerics::snapshot::write_trajectory;
use spdecrit_numerics::{estimate_holder_exponent, solve_z1_mild, Z1Params};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SampleParams {
    pub dim: usize,
    pub grid: usize,
    pub seed: u64,
    pub tmax: f64,
    pub steps: usize,
    pub estimate: bool,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePayload {
    pub out: String,
    pub files: Vec<String>,
    pub snapshots: usize,
    /// Fitted Hölder exponent of the final field, when requested.
    pub exponent: Option<f64>,
}

pub fn sample(p: &SampleParams) -> Result<SamplePayload> {
    let shape = vec![p.grid; p.dim];
    let traj = solve_z1_mild(&Z1Params::heat(&shape, p.tmax / p.steps as f64, p.steps, p.seed))?;
    if p.out.is_file() {
        return Err(CliError::Io(format!("{} exists and is not a directory", p.out.display())));
    }
    let paths = write_trajectory(&p.out, &traj, Some(p.seed))?;
    let exponent = if p.estimate { Some(estimate_holder_exponent(traj.last())?) } else { None };
    let name = |q: &Path| q.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(SamplePayload {
        out: p.out.display().to_string(),
        files: paths.iter().map(|q| name(q)).collect(),
        snapshots: traj.fields.len(),
        exponent,
    })
}
