//! How exactly a stored trajectory solves the equation: the defect of the
//! Duhamel formula between two snapshots, and the dual-Strichartz norm of
//! the pointwise PDE defect iu_t + Δu − F(u).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics;
use crate::error::{Error, Result};
use crate::grid::{dft, Field};

use super::{nonlinearity, trapezoid, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// sup over stored t ∈ (t₀, t₁] of
    /// ‖u(t) − e^{i(t−t₀)Δ}u(t₀) + i∫_{t₀}^t e^{i(t−s)Δ}F(u(s)) ds‖₂
    pub duhamel_l2: f64,
    /// ‖iu_t + Δu − F(u)‖ in L^{2(d+2)/(d+4)}_{t,x} over the interval.
    pub pde_dual_norm: f64,
    pub interval: (f64, f64),
}

/// φ₁(z) = (e^z − 1)/z and ψ(z) = (e^z(z − 1) + 1)/z², the weights of the
/// product trapezoid rule ∫₀^τ e^{iωs}[(1 − s/τ)a + (s/τ)b] ds
/// = τ[(φ₁ − ψ)a + ψb] with z = iωτ.
fn product_weights(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 1e-2 {
        let mut phi1 = Complex64::new(0.0, 0.0);
        let mut psi = Complex64::new(0.0, 0.0);
        let mut zk = Complex64::new(1.0, 0.0);
        let mut fact = 1.0;
        for k in 0..8 {
            // z^k/(k+1)! and (k+1) z^k/(k+2)!
            let f1 = fact * (k as f64 + 1.0);
            let f2 = f1 * (k as f64 + 2.0);
            phi1 += zk / f1;
            psi += zk * (k as f64 + 1.0) / f2;
            zk *= z;
            fact = f1;
        }
        (phi1, psi)
    } else {
        let e = z.exp();
        ((e - 1.0) / z, (e * (z - 1.0) + 1.0) / (z * z))
    }
}

/// Duhamel and PDE defects of `traj` on [t0, t1]; both must be stored
/// snapshot times. The Duhamel entry is the largest defect
/// ‖u(t) − e^{i(t−t₀)Δ}u(t₀) + i∫_{t₀}^t e^{i(t−s)Δ}F(u(s)) ds‖₂ over the
/// stored t ∈ (t₀, t₁], so every snapshot in the window is checked. The
/// time integral treats F(u(s)) as piecewise linear between snapshots and
/// integrates the free-propagator phase exactly, which reduces to the
/// trapezoid rule for slowly varying phases. The exact phase is taken in
/// the frame moving with the lattice frequency nearest the spectral center
/// of u(t₀), so the quadrature error does not grow under Galilean boosts.
pub fn duhamel_residual(traj: &Trajectory, t0: f64, t1: f64) -> Result<ResidualReport> {
    let i0 = traj.index_of(t0)?;
    let i1 = traj.index_of(t1)?;
    if i1 < i0 {
        return Err(Error::InvalidArgument("residual interval must be ordered".into()));
    }
    let (t0, t1) = (traj.times[i0], traj.times[i1]);
    let grid = traj.grid();
    let mu = traj.config.mu.mu();
    let norms = grid.frequency_norms_sq();
    let scale = grid.cell_volume() / grid.len() as f64;

    let spectrum = |f: &Field| {
        let mut v = f.values.clone();
        dft(&grid, &mut v, false);
        v
    };

    let u0 = spectrum(&traj.fields[i0]);
    let center = lattice_center(&traj.fields[i0]);
    let frame: Vec<f64> = (0..grid.len())
        .map(|i| {
            let xi = grid.frequency(i);
            (0..grid.dim()).map(|a| (xi[a] - center[a]).powi(2)).sum()
        })
        .collect();
    // the slowly varying part e^{i(s−t₀)(|ξ|² − |ξ − ξ_c|²)} F̂(s)
    let slow = |j: usize| -> Vec<Complex64> {
        let s = traj.times[j] - t0;
        let mut f = spectrum(&nonlinearity(&traj.fields[j], mu));
        for ((z, &w), &wc) in f.iter_mut().zip(&norms).zip(&frame) {
            *z *= Complex64::from_polar(1.0, s * (w - wc));
        }
        f
    };
    // ∫_{t₀}^{t_j} e^{i(s−t₀)|ξ|²} F̂(s) ds, accumulated snapshot by snapshot
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut prev = if mu != 0.0 { slow(i0) } else { vec![] };
    let mut duhamel_l2: f64 = 0.0;
    for j in i0..i1 {
        let (ta, tb) = (traj.times[j], traj.times[j + 1]);
        let tau = tb - ta;
        if mu != 0.0 {
            let next = slow(j + 1);
            for (k, a) in acc.iter_mut().enumerate() {
                let w = frame[k];
                let (phi1, psi) = product_weights(Complex64::new(0.0, w * tau));
                let base = Complex64::from_polar(tau, (ta - t0) * w);
                *a += base * ((phi1 - psi) * prev[k] + psi * next[k]);
            }
            prev = next;
        }
        let u = spectrum(&traj.fields[j + 1]);
        let defect: f64 = u
            .iter()
            .zip(&u0)
            .zip(&acc)
            .zip(&norms)
            .map(|(((a, b), c), &k2)| {
                let back = Complex64::from_polar(1.0, -(tb - t0) * k2);
                (a - back * (b - Complex64::i() * c)).norm_sqr()
            })
            .sum();
        duhamel_l2 = duhamel_l2.max((defect * scale).sqrt());
    }

    let pde_dual_norm = defect_norm(traj, i0, i1, true)?;
    Ok(ResidualReport { duhamel_l2, pde_dual_norm, interval: (t0, t1) })
}

/// Lattice frequency nearest the spectral mass median; zero for vanishing
/// fields.
fn lattice_center(field: &Field) -> [f64; 2] {
    let grid = field.grid;
    let mut out = [0.0; 2];
    if let Ok((_, xi)) = diagnostics::centers(field) {
        let dxi = grid.dxi();
        let kmax = (grid.points_per_axis() / 2) as f64 - 1.0;
        for (o, v) in out.iter_mut().zip(&xi) {
            *o = (v / dxi).round().clamp(-kmax, kmax) * dxi;
        }
    }
    out
}

/// ‖(i∂_t + Δ)u‖ in L^{2(d+2)/(d+4)}_{t,x} over the whole trajectory (the
/// second term of the strong Strichartz norm).
pub fn linear_defect_norm(traj: &Trajectory) -> Result<f64> {
    defect_norm(traj, 0, traj.len() - 1, false)
}

/// Second-order finite-difference weights for u_t at node j.
fn derivative_stencil(times: &[f64], j: usize) -> [(usize, f64); 3] {
    let m = times.len();
    if j == 0 {
        let (h1, h2) = (times[1] - times[0], times[2] - times[1]);
        [
            (0, -(2.0 * h1 + h2) / (h1 * (h1 + h2))),
            (1, (h1 + h2) / (h1 * h2)),
            (2, -h1 / (h2 * (h1 + h2))),
        ]
    } else if j == m - 1 {
        let (h1, h2) = (times[m - 2] - times[m - 3], times[m - 1] - times[m - 2]);
        [
            (m - 3, h2 / (h1 * (h1 + h2))),
            (m - 2, -(h1 + h2) / (h1 * h2)),
            (m - 1, (2.0 * h2 + h1) / (h2 * (h1 + h2))),
        ]
    } else {
        let (h1, h2) = (times[j] - times[j - 1], times[j + 1] - times[j]);
        [
            (j - 1, -h2 / (h1 * (h1 + h2))),
            (j, (h2 - h1) / (h1 * h2)),
            (j + 1, h1 / (h2 * (h1 + h2))),
        ]
    }
}

fn defect_norm(traj: &Trajectory, i0: usize, i1: usize, with_nonlinearity: bool) -> Result<f64> {
    if traj.len() < 3 {
        return Err(Error::InvalidArgument("defect norm needs at least three snapshots".into()));
    }
    if i0 == i1 {
        return Ok(0.0);
    }
    let grid = traj.grid();
    let d = grid.dim() as f64;
    let p = 2.0 * (d + 2.0) / (d + 4.0);
    let mu = traj.config.mu.mu();
    let norms = grid.frequency_norms_sq();
    let scale = 1.0 / grid.len() as f64;

    let spectra: Vec<Vec<Complex64>> = (0..traj.len())
        .map(|j| {
            let mut v = traj.fields[j].values.clone();
            dft(&grid, &mut v, false);
            v
        })
        .collect();
    // (i∂_t + Δ)u = e^{itΔ} i∂_t(e^{-itΔ}u): differentiate the interaction
    // picture, which is exact for free evolutions at any snapshot spacing
    let mut integrals = Vec::with_capacity(i1 - i0 + 1);
    for j in i0..=i1 {
        let u = &traj.fields[j];
        let tj = traj.times[j];
        let mut defect = vec![Complex64::new(0.0, 0.0); grid.len()];
        for (idx, w) in derivative_stencil(&traj.times, j) {
            let dt = traj.times[idx] - tj;
            for ((z, v), &k2) in defect.iter_mut().zip(&spectra[idx]).zip(&norms) {
                *z += Complex64::i() * w * scale * Complex64::from_polar(1.0, dt * k2) * v;
            }
        }
        dft(&grid, &mut defect, true);
        if with_nonlinearity && mu != 0.0 {
            let f = nonlinearity(u, mu);
            for (z, v) in defect.iter_mut().zip(&f.values) {
                *z -= v;
            }
        }
        integrals.push(defect.iter().map(|z| z.norm().powf(p)).sum::<f64>() * grid.cell_volume());
    }
    Ok(trapezoid(&traj.times[i0..=i1], &integrals).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::propagator::{evolve, free_trajectory, Nonlinearity, SolverConfig};

    #[test]
    fn series_and_closed_form_weights_agree() {
        for z in [Complex64::new(0.0, 0.0099), Complex64::new(0.0, -0.0101)] {
            let (a, b) = product_weights(z);
            let e = z.exp();
            let (ea, eb) = ((e - 1.0) / z, (e * (z - 1.0) + 1.0) / (z * z));
            assert!((a - ea).norm() < 1e-12 && (b - eb).norm() < 1e-10);
        }
        let (a, b) = product_weights(Complex64::new(0.0, 0.0));
        assert_eq!((a.re, b.re), (1.0, 0.5));
    }

    #[test]
    fn free_trajectory_has_no_duhamel_defect() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let u0 = Field::from_fn(g, |x| Complex64::from_polar((-x[0] * x[0]).exp(), x[0]));
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * 0.05).collect();
        let traj = free_trajectory(&u0, &times).unwrap();
        let r = duhamel_residual(&traj, 0.0, 1.0).unwrap();
        assert!(r.duhamel_l2 < 1e-10);
        let cfg = SolverConfig::new(Nonlinearity::Linear, 1, 1e-2);
        let stepped = evolve(&u0, (0.0, 0.5), &cfg).unwrap();
        assert!(duhamel_residual(&stepped, 0.0, 0.5).unwrap().duhamel_l2 < 1e-10);
    }

    #[test]
    fn corrupted_snapshot_is_detected() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let u0 = Field::from_real_fn(g, |x| 0.5 * (-x[0] * x[0] / 2.0).exp());
        let cfg = SolverConfig::new(Nonlinearity::Defocusing, 1, 1e-3).with_store_every(0.01);
        let mut traj = evolve(&u0, (0.0, 1.0), &cfg).unwrap();
        let clean = duhamel_residual(&traj, 0.0, 1.0).unwrap();
        let mid = traj.len() / 2;
        let bump = Field::from_real_fn(g, |x| 0.1 * (-x[0] * x[0]).exp());
        traj.fields[mid] = traj.fields[mid].add(&bump).unwrap();
        let dirty = duhamel_residual(&traj, 0.0, 1.0).unwrap();
        assert!(clean.duhamel_l2 < 1e-4);
        assert!(dirty.duhamel_l2 > 1e-2, "{}", dirty.duhamel_l2);
    }

    #[test]
    fn endpoints_must_be_snapshots() {
        let g = make_grid(1, 64, 8.0).unwrap();
        let traj = free_trajectory(&Field::zeros(g), &[0.0, 0.5, 1.0]).unwrap();
        assert!(duhamel_residual(&traj, 0.0, 0.7).is_err());
        let r = duhamel_residual(&traj, 0.5, 0.5).unwrap();
        assert_eq!(r.duhamel_l2, 0.0);
    }
}
