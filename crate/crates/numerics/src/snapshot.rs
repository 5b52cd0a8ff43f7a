//! Binary field snapshots and trajectory directories.
//!
//! A snapshot is the ASCII magic `SPDF`, then little-endian `u32` version,
//! dimension and one extent per axis, then the values as little-endian `f64`
//! in row-major order. A trajectory directory holds `snap_NNNNNN.spdf` files
//! and `manifest.json` with `{dt, times, n, seed}`, `n` the snapshot count.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::field::{PeriodicField, Trajectory};
use crate::{NumericsError, Result};

pub const MAGIC: &[u8; 4] = b"SPDF";
pub const VERSION: u32 = 1;

pub fn encode_snapshot(field: &PeriodicField) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 4 * field.dim() + 8 * field.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(field.dim() as u32).to_le_bytes());
    for &n in field.shape() {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<PeriodicField> {
    let bad = |m: &str| NumericsError::Format(m.to_string());
    let u32_at = |off: usize| -> Result<u32> {
        let b = bytes.get(off..off + 4).ok_or_else(|| bad("truncated header"))?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")))
    };
    if bytes.get(..4) != Some(MAGIC.as_slice()) {
        return Err(bad("missing SPDF magic"));
    }
    let version = u32_at(4)?;
    if version != VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let dim = u32_at(8)? as usize;
    if dim == 0 || dim > 2 {
        return Err(bad(&format!("unsupported dimension {dim}")));
    }
    let shape: Vec<usize> = (0..dim).map(|a| u32_at(12 + 4 * a).map(|n| n as usize)).collect::<Result<_>>()?;
    let start = 12 + 4 * dim;
    let len: usize = shape.iter().product();
    let body = &bytes[start..];
    if body.len() != 8 * len {
        return Err(bad(&format!("expected {} value bytes, found {}", 8 * len, body.len())));
    }
    let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    PeriodicField::new(shape, values)
}

/// Writes through a temporary file in the same directory and renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| NumericsError::Format(format!("bad path {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let mut file = fs::File::create(&tmp)?;
    file.write_all(bytes)?;
    file.sync_all()?;
    drop(file);
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

pub fn write_snapshot(path: &Path, field: &PeriodicField) -> Result<()> {
    write_atomic(path, &encode_snapshot(field))
}

pub fn read_snapshot(path: &Path) -> Result<PeriodicField> {
    decode_snapshot(&fs::read(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub dt: f64,
    pub times: Vec<f64>,
    pub n: usize,
    pub seed: Option<u64>,
}

pub fn snapshot_name(k: usize) -> String {
    format!("snap_{k:06}.spdf")
}

/// Writes every field plus the manifest; returns the written paths.
pub fn write_trajectory(dir: &Path, traj: &Trajectory, seed: Option<u64>) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(traj.fields.len() + 1);
    for (k, field) in traj.fields.iter().enumerate() {
        let path = dir.join(snapshot_name(k));
        write_snapshot(&path, field)?;
        paths.push(path);
    }
    let manifest = Manifest { dt: traj.dt, times: traj.times.clone(), n: traj.fields.len(), seed };
    let json = serde_json::to_vec_pretty(&manifest).map_err(|e| NumericsError::Format(e.to_string()))?;
    let path = dir.join("manifest.json");
    write_atomic(&path, &json)?;
    paths.push(path);
    Ok(paths)
}

pub fn read_trajectory(dir: &Path) -> Result<(Trajectory, Manifest)> {
    let text = fs::read(dir.join("manifest.json"))?;
    let manifest: Manifest = serde_json::from_slice(&text).map_err(|e| NumericsError::Format(e.to_string()))?;
    let fields = (0..manifest.n).map(|k| read_snapshot(&dir.join(snapshot_name(k)))).collect::<Result<Vec<_>>>()?;
    let mut traj = Trajectory::new(manifest.dt, fields)?;
    if manifest.times.len() == traj.fields.len() {
        traj.times = manifest.times.clone();
    }
    Ok((traj, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let f = PeriodicField::new(vec![2, 4], (0..8).map(|i| i as f64).collect()).unwrap();
        let bytes = encode_snapshot(&f);
        assert_eq!(&bytes[..4], b"SPDF");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 4);
        assert_eq!(f64::from_le_bytes(bytes[20 + 8..20 + 16].try_into().unwrap()), 1.0);
        assert_eq!(decode_snapshot(&bytes).unwrap(), f);
    }

    #[test]
    fn rejects_corrupt_input() {
        assert!(decode_snapshot(b"NOPE").is_err());
        let f = PeriodicField::zeros(&[4]).unwrap();
        let bytes = encode_snapshot(&f);
        assert!(decode_snapshot(&bytes[..bytes.len() - 1]).is_err());
    }
}
