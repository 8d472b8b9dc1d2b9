use serde::{Deserialize, Serialize};

use crate::diagnostics::{centers, scale_or_floor};
use crate::grid::{mass, Field};

use super::Trajectory;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorSample {
    pub t: f64,
    /// Frequency scale N(t); the lattice spacing π/L for vanishing fields.
    pub scale: f64,
    pub max_amplitude: f64,
    pub mass_in_ball: f64,
    pub x_center: Vec<f64>,
}

fn mass_in_ball(field: &Field, center: &[f64], radius: f64) -> f64 {
    let g = &field.grid;
    let d = g.dim();
    (0..g.len())
        .filter(|&i| {
            let x = g.position(i);
            (0..d).map(|a| (x[a] - center[a]).powi(2)).sum::<f64>() <= radius * radius
        })
        .map(|i| field.values[i].norm_sqr())
        .sum::<f64>()
        * g.cell_volume()
}

/// Per-snapshot concentration scale, peak amplitude and mass within
/// `radius` of the spatial center.
pub fn blowup_monitor(traj: &Trajectory, radius: f64) -> Vec<MonitorSample> {
    let eta = traj.config.eta_ref;
    traj.times
        .iter()
        .zip(&traj.fields)
        .map(|(&t, u)| {
            let d = u.grid.dim();
            let (x_center, in_ball) = match centers(u) {
                Ok((x, _)) => {
                    let m = mass_in_ball(u, &x, radius);
                    (x, m)
                }
                Err(_) => (vec![0.0; d], 0.0),
            };
            MonitorSample {
                t,
                scale: scale_or_floor(u, eta),
                max_amplitude: u.max_abs(),
                mass_in_ball: if mass(u) > 0.0 { in_ball } else { 0.0 },
                x_center,
            }
        })
        .collect()
}
