use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::resample::resample_affine;
use crate::symmetry::UNRESOLVED_TOL;

use super::Trajectory;

/// v(t, x) = |t|^{-d/2} e^{i|x|²/4t} u(−1/t, x/t), evaluated at t = −1/s for
/// every stored time s. The source interval must not contain 0.
///
/// Applying the map twice returns u(t, −x), which is u itself for even data.
pub fn pseudoconformal(traj: &Trajectory) -> Result<Trajectory> {
    let (a, b) = (traj.start(), traj.end());
    if a <= 0.0 && b >= 0.0 {
        return Err(Error::IntervalContainsZero { t0: a, t1: b });
    }
    let grid = traj.grid();
    let d = grid.dim();
    let mut times = Vec::with_capacity(traj.len());
    let mut fields = Vec::with_capacity(traj.len());
    for (&s, u) in traj.times.iter().zip(&traj.fields) {
        let t = -1.0 / s;
        let (mut v, lost) = resample_affine(u, [0.0, 0.0], t);
        let amp = t.abs().powf(-(d as f64) / 2.0);
        for (i, z) in v.values.iter_mut().enumerate() {
            let x = grid.position(i);
            let r2 = x[0] * x[0] + x[1] * x[1];
            *z *= Complex64::from_polar(amp, r2 / (4.0 * t));
        }
        v.diverged = lost > UNRESOLVED_TOL;
        times.push(t);
        fields.push(v);
    }
    let mut out = Trajectory::from_snapshots(traj.config.clone(), times, fields)?;
    out.diverged |= traj.diverged;
    Ok(out)
}
