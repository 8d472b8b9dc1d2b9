use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::grid::{l2_norm, mass, Field};

use super::{evolve, scattering_size, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// ‖u(t₀) − v₀‖₂
    pub delta: f64,
    /// S(u − v) over the interval of `u`.
    pub s_diff: f64,
    pub max_mass_diff: f64,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilitySweep {
    pub rows: Vec<StabilityReport>,
    /// S(u − v) is nondecreasing in δ over the sweep.
    pub monotone: bool,
    pub passed: bool,
}

/// Evolves v from v₀ with the configuration of `u` over the same interval
/// and measures how far the two solutions drift apart.
pub fn stability_experiment(u: &Trajectory, v0: &Field) -> Result<StabilityReport> {
    let u0 = &u.fields[0];
    let delta = l2_norm(&u0.sub(v0)?);
    let v = evolve(v0, (u.start(), u.end()), &u.config)?;
    if v.diverged || v.len() != u.len() {
        return Ok(StabilityReport { delta, s_diff: f64::INFINITY, max_mass_diff: f64::INFINITY, diverged: true });
    }
    let diff = u.difference(&v)?;
    let max_mass_diff = diff.fields.iter().map(mass).fold(0.0, f64::max);
    Ok(StabilityReport { delta, s_diff: scattering_size(&diff), max_mass_diff, diverged: false })
}

/// Runs [`stability_experiment`] for v₀ = u(t₀) + δ·p/‖p‖₂ over `deltas`
/// (in increasing order); sweep points run under `exec`.
pub fn stability_sweep(u: &Trajectory, direction: &Field, deltas: &[f64], exec: Exec) -> Result<StabilitySweep> {
    let norm = l2_norm(direction);
    if norm == 0.0 {
        return Err(Error::InvalidArgument("perturbation direction is zero".into()));
    }
    if deltas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("deltas must be increasing".into()));
    }
    let u0 = &u.fields[0];
    let rows = exec
        .map(deltas, |&delta| {
            let v0 = u0.add(&direction.scale((delta / norm).into()))?;
            stability_experiment(u, &v0)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let monotone = rows.windows(2).all(|w| w[1].s_diff >= w[0].s_diff);
    let passed = monotone && rows.iter().all(|r| !r.diverged);
    Ok(StabilitySweep { rows, monotone, passed })
}
