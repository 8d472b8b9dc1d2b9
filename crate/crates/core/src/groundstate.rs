//! The ground state Q: the positive radial solution of ΔQ + Q^{1+4/d} = Q,
//! computed by Petviashvili iteration, plus the soliton solutions in its
//! orbit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{apply_multiplier, dft, l2_norm, mass, Field, Grid};
use crate::propagator::{SolverConfig, Trajectory};
use crate::symmetry::{apply, apply_trajectory, GroupElement};

/// Mass below which an iterate is treated as collapsed.
pub const COLLAPSE_MASS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub field: Field,
    /// ‖ΔQ + Q^{1+4/d} − Q‖₂
    pub residual: f64,
    pub mass: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
}

/// JSON sidecar written next to the binary snapshot of Q.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateSummary {
    pub d: usize,
    pub mass: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl GroundState {
    pub fn dim(&self) -> usize {
        self.field.grid.dim()
    }

    pub fn summary(&self) -> GroundStateSummary {
        GroundStateSummary { d: self.dim(), mass: self.mass, residual: self.residual, iterations: self.iterations }
    }

    /// Largest |Q(x) − Q(−x)|, and in d = 2 also |Q(x, y) − Q(y, x)|.
    pub fn asymmetry(&self) -> f64 {
        let f = &self.field;
        let mut worst: f64 = 0.0;
        let g = f.grid;
        let n = g.points_per_axis();
        let mirror = |j: usize| if j == 0 { 0 } else { n - j };
        for i in 0..g.len() {
            let [a, b] = g.unravel(i);
            let j = if g.dim() == 1 { mirror(a) } else { mirror(a) * n + mirror(b) };
            worst = worst.max((f.values[i] - f.values[j]).norm());
            if g.dim() == 2 {
                worst = worst.max((f.values[i] - f.values[b * n + a]).norm());
            }
        }
        worst
    }
}

fn power(d: usize) -> f64 {
    1.0 + 4.0 / d as f64
}

/// ‖ΔQ + Q^{1+4/d} − Q‖₂ for real samples.
pub fn ground_state_residual(q: &Field) -> f64 {
    let g = q.grid;
    let p = power(g.dim());
    let lap = apply_multiplier(q, |i| Complex64::new(-g.frequency_norm_sq(i) - 1.0, 0.0));
    let res = lap.zip(q, |l, z| l + Complex64::new(z.re.abs().powf(p - 1.0) * z.re, 0.0)).expect("same grid");
    l2_norm(&res)
}

/// Q(x) = 3^{1/4} sech^{1/2}(2x), the one-dimensional ground state.
pub fn closed_form_q1d(grid: Grid) -> Result<Field> {
    if grid.dim() != 1 {
        return Err(Error::InvalidArgument("closed-form ground state exists only for d = 1".into()));
    }
    Ok(Field::from_real_fn(grid, |x| 3f64.powf(0.25) / (2.0 * x[0]).cosh().sqrt()).with_label("Q"))
}

/// Petviashvili iteration from a unit-height Gaussian.
pub fn petviashvili_solve(grid: Grid, tol: f64, max_iter: usize) -> Result<GroundState> {
    let init = Field::from_real_fn(grid, |x| (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp());
    petviashvili_from(&init, tol, max_iter)
}

/// Petviashvili iteration Q ← γ^α (−Δ+1)^{-1} Q^{1+4/d} with
/// γ = ⟨(−Δ+1)Q, Q⟩ / ⟨Q^{1+4/d}, Q⟩ and α = (1+4/d)/(4/d), starting at
/// `init` (whose real part is used). Stops once the PDE residual is below
/// `tol`.
pub fn petviashvili_from(init: &Field, tol: f64, max_iter: usize) -> Result<GroundState> {
    let g = init.grid;
    let d = g.dim();
    let p = power(d);
    let alpha = p / (p - 1.0);
    let symbol: Vec<f64> = g.frequency_norms_sq().iter().map(|k2| k2 + 1.0).collect();
    let mut q: Vec<Complex64> = init.values.iter().map(|z| Complex64::new(z.re, 0.0)).collect();
    let mut history = Vec::new();
    let finish = |q: &[Complex64], iterations: usize, history: Vec<f64>| -> GroundState {
        let field = Field::from_values(g, q.to_vec()).expect("grid size").with_label("Q");
        let residual = ground_state_residual(&field);
        GroundState { mass: mass(&field), residual, iterations, residual_history: history, field }
    };

    for it in 0..=max_iter {
        let current = Field::from_values(g, q.clone())?;
        let m = mass(&current);
        if m < COLLAPSE_MASS || !current.is_finite() {
            return Err(Error::Collapse { mass: m });
        }
        let res = ground_state_residual(&current);
        history.push(res);
        if res < tol {
            return Ok(finish(&q, it, history));
        }
        if it == max_iter {
            return Err(Error::NoConvergence { iterations: it, residual: res });
        }
        let mut q_hat = q.clone();
        dft(&g, &mut q_hat, false);
        let mut n_hat: Vec<Complex64> =
            q.iter().map(|z| Complex64::new(z.re.abs().powf(p - 1.0) * z.re, 0.0)).collect();
        dft(&g, &mut n_hat, false);
        let num: f64 = q_hat.iter().zip(&symbol).map(|(z, s)| s * z.norm_sqr()).sum();
        let den: f64 = n_hat.iter().zip(&q_hat).map(|(a, b)| (a * b.conj()).re).sum();
        if !(den > 0.0) {
            return Err(Error::Collapse { mass: m });
        }
        let gamma = (num / den).powf(alpha);
        let inv_n = 1.0 / g.len() as f64;
        for (z, s) in n_hat.iter_mut().zip(&symbol) {
            *z *= gamma * inv_n / s;
        }
        dft(&g, &mut n_hat, true);
        for (dst, z) in q.iter_mut().zip(&n_hat) {
            *dst = Complex64::new(z.re, 0.0);
        }
    }
    unreachable!()
}

/// g Q, the initial datum of the soliton T_g(e^{it}Q).
pub fn soliton_initial_data(q: &GroundState, g: &GroupElement) -> Result<Field> {
    Ok(apply(g, &q.field)?.with_label("soliton"))
}

/// The exact soliton T_g(e^{it}Q) sampled at λ²s for each `s` in `times`.
pub fn exact_soliton(q: &GroundState, g: &GroupElement, times: &[f64]) -> Result<Trajectory> {
    let fields = times.iter().map(|&t| q.field.scale(Complex64::from_polar(1.0, t))).collect();
    let base = Trajectory::from_snapshots(SolverConfig::linear(q.dim()), times.to_vec(), fields)?;
    apply_trajectory(g, &base)
}
