//! Binary snapshot files and trajectory manifests.
//!
//! A snapshot is the magic `MCNL`, a little-endian u16 format version,
//! u16 dimension, u32 points per axis, f64 box half-width, followed by the
//! samples in row-major order as (f64 re, f64 im) pairs.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{centers, scale_or_floor};
use crate::error::{Error, Result};
use crate::grid::{mass, Field, Grid};
use crate::propagator::{duhamel_residual, ResidualReport, SolverConfig, Trajectory};

const MAGIC: &[u8; 4] = b"MCNL";
const VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 2 + 4 + 8;

pub fn encode_field(field: &Field) -> Vec<u8> {
    let g = field.grid;
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * field.values.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.dim() as u16).to_le_bytes());
    out.extend_from_slice(&(g.points_per_axis() as u32).to_le_bytes());
    out.extend_from_slice(&g.half_width().to_le_bytes());
    for z in &field.values {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

fn take<const N: usize>(bytes: &[u8], at: &mut usize) -> Result<[u8; N]> {
    let end = *at + N;
    let slice = bytes.get(*at..end).ok_or_else(|| Error::Format("truncated file".into()))?;
    *at = end;
    Ok(slice.try_into().expect("slice length"))
}

pub fn decode_field(bytes: &[u8]) -> Result<Field> {
    let mut at = 0;
    if &take::<4>(bytes, &mut at)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u16::from_le_bytes(take(bytes, &mut at)?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = u16::from_le_bytes(take(bytes, &mut at)?) as usize;
    let n = u32::from_le_bytes(take(bytes, &mut at)?) as usize;
    let half_width = f64::from_le_bytes(take(bytes, &mut at)?);
    let grid = Grid::new(dim, n, half_width)?;
    if bytes.len() != HEADER_LEN + 16 * grid.len() {
        return Err(Error::Format(format!("expected {} samples", grid.len())));
    }
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let re = f64::from_le_bytes(take(bytes, &mut at)?);
        let im = f64::from_le_bytes(take(bytes, &mut at)?);
        values.push(Complex64::new(re, im));
    }
    Field::from_values(grid, values)
}

pub fn write_field(path: &Path, field: &Field) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_field(field))?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<Field> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_field(&bytes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryManifest {
    pub grid: Grid,
    pub config: SolverConfig,
    pub times: Vec<f64>,
    /// Snapshot file names relative to the manifest.
    pub snapshots: Vec<String>,
    pub diverged: bool,
    pub mass_drift: f64,
    #[serde(default)]
    pub stats: Vec<SnapshotStats>,
    #[serde(default)]
    pub residual: Option<ResidualReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotStats {
    pub t: f64,
    pub mass: f64,
    /// N(t), or the floor Δξ for vanishing fields.
    pub scale: f64,
    pub x_center: Vec<f64>,
    pub xi_center: Vec<f64>,
    pub peak: f64,
}

pub fn snapshot_stats(traj: &Trajectory) -> Vec<SnapshotStats> {
    traj.times
        .iter()
        .zip(&traj.fields)
        .map(|(&t, f)| {
            let d = f.grid.dim();
            let (x_center, xi_center) = centers(f).unwrap_or((vec![0.0; d], vec![0.0; d]));
            SnapshotStats {
                t,
                mass: mass(f),
                scale: scale_or_floor(f, traj.config.eta_ref),
                x_center,
                xi_center,
                peak: f.max_abs(),
            }
        })
        .collect()
}

/// Writes `trajectory.json` and one snapshot per stored time into `dir`.
pub fn write_trajectory(dir: &Path, traj: &Trajectory) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut snapshots = Vec::with_capacity(traj.len());
    for (k, f) in traj.fields.iter().enumerate() {
        let name = format!("snap_{k:05}.bin");
        write_field(&dir.join(&name), f)?;
        snapshots.push(name);
    }
    let manifest = TrajectoryManifest {
        grid: traj.grid(),
        config: traj.config.clone(),
        times: traj.times.clone(),
        snapshots,
        diverged: traj.diverged,
        mass_drift: traj.mass_drift,
        stats: snapshot_stats(traj),
        residual: if traj.len() >= 3 { duhamel_residual(traj, traj.start(), traj.end()).ok() } else { None },
    };
    let path = dir.join("trajectory.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(path)
}

/// Reads a trajectory from its manifest file.
pub fn read_trajectory(manifest_path: &Path) -> Result<Trajectory> {
    let manifest: TrajectoryManifest = serde_json::from_str(&fs::read_to_string(manifest_path)?)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let fields = manifest
        .snapshots
        .iter()
        .map(|name| read_field(&dir.join(name)))
        .collect::<Result<Vec<_>>>()?;
    let mut traj = Trajectory::from_snapshots(manifest.config, manifest.times, fields)?;
    traj.diverged |= manifest.diverged;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn round_trip_bytes() {
        let g = make_grid(2, 8, 3.0).unwrap();
        let f = Field::from_fn(g, |x| Complex64::new(x[0], -x[1] * 0.5));
        let back = decode_field(&encode_field(&f)).unwrap();
        assert_eq!(back.values, f.values);
        assert_eq!(back.grid, g);
    }

    #[test]
    fn rejects_damaged_input() {
        let g = make_grid(1, 8, 3.0).unwrap();
        let mut bytes = encode_field(&Field::zeros(g));
        assert!(decode_field(&bytes[..bytes.len() - 1]).is_err());
        bytes[0] = b'X';
        assert!(decode_field(&bytes).is_err());
    }
}
