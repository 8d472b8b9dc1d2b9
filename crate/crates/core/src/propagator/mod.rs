//! Free and nonlinear evolution of iu_t + Δu = μ|u|^{4/d}u.
//!
//! The nonlinear flow is integrated by Strang splitting: half a kinetic step
//! (the exact multiplier e^{-iτ|ξ|²}), a full nonlinear step u ↦
//! e^{-iμ|u|^{4/d}τ}u (exact, since |u| is constant along that sub-flow),
//! and another half kinetic step.

mod monitor;
mod pseudoconformal;
mod residual;
mod stability;
mod trajectory;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use monitor::{blowup_monitor, MonitorSample};
pub use pseudoconformal::pseudoconformal;
pub use residual::{duhamel_residual, linear_defect_norm, ResidualReport};
pub use stability::{stability_experiment, stability_sweep, StabilityReport, StabilitySweep};
pub use trajectory::{
    scattering_size, scattering_size_after, scattering_size_before, spacetime_lp_norm, trapezoid, Trajectory,
};

use crate::diagnostics;
use crate::error::{Error, Result};
use crate::grid::{apply_multiplier, dft, Field, Grid};

/// Sign μ in F(u) = μ|u|^{4/d}u; `Linear` switches the nonlinearity off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nonlinearity {
    Focusing,
    Defocusing,
    Linear,
}

impl Nonlinearity {
    pub fn mu(self) -> f64 {
        match self {
            Nonlinearity::Focusing => -1.0,
            Nonlinearity::Defocusing => 1.0,
            Nonlinearity::Linear => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepPolicy {
    Fixed,
    /// dt ← min(dt, cap · N(t)^{-2}), re-evaluated at every stored snapshot.
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub mu: Nonlinearity,
    pub dim: usize,
    pub dt: f64,
    pub dt_policy: StepPolicy,
    pub adaptive_cap: f64,
    pub store_every: f64,
    pub max_steps: usize,
    /// Mass fraction left outside the frequency ball that defines N(t).
    pub eta_ref: f64,
    /// Stop and flag the run once N(t) exceeds nπ/(8L).
    pub nyquist_guard: bool,
}

impl SolverConfig {
    pub fn new(mu: Nonlinearity, dim: usize, dt: f64) -> Self {
        SolverConfig {
            mu,
            dim,
            dt,
            dt_policy: StepPolicy::Fixed,
            adaptive_cap: 0.1,
            store_every: 1e-2,
            max_steps: 10_000_000,
            eta_ref: 0.1,
            nyquist_guard: true,
        }
    }

    /// Configuration attached to trajectories that were not integrated
    /// (exact free evolutions, transformed trajectories).
    pub fn linear(dim: usize) -> Self {
        Self::new(Nonlinearity::Linear, dim, 1e-3)
    }

    pub fn with_store_every(mut self, store_every: f64) -> Self {
        self.store_every = store_every;
        self
    }

    pub fn with_policy(mut self, policy: StepPolicy) -> Self {
        self.dt_policy = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("time step {} must be positive", self.dt)));
        }
        if !(self.store_every > 0.0) {
            return Err(Error::InvalidArgument("snapshot cadence must be positive".into()));
        }
        if self.max_steps < 1 {
            return Err(Error::InvalidArgument("max_steps must be at least 1".into()));
        }
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::InvalidArgument(format!("dimension {} not in {{1, 2}}", self.dim)));
        }
        if !(self.eta_ref > 0.0 && self.eta_ref < 1.0) {
            return Err(Error::InvalidArgument("eta_ref must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Frequency scale above which a run is flagged as diverged.
pub fn nyquist_guard(grid: &Grid) -> f64 {
    grid.points_per_axis() as f64 * std::f64::consts::PI / (8.0 * grid.half_width())
}

/// e^{itΔ} f: multiply the spectrum by e^{-it|ξ|²}.
pub fn free_propagate(field: &Field, t: f64) -> Field {
    if t == 0.0 {
        return field.clone();
    }
    let grid = field.grid;
    apply_multiplier(field, |i| Complex64::from_polar(1.0, -t * grid.frequency_norm_sq(i)))
}

/// Exact free evolution sampled at the given times.
pub fn free_trajectory(u0: &Field, times: &[f64]) -> Result<Trajectory> {
    let fields = times.iter().map(|&t| free_propagate(u0, t)).collect();
    Trajectory::from_snapshots(SolverConfig::linear(u0.grid.dim()), times.to_vec(), fields)
}

/// Scattering sizes of the free evolutions e^{itΔ}fⱼ over `times`, one per
/// part followed by the size of their sum. Snapshots are not kept.
pub fn free_scattering_sizes(parts: &[Field], times: &[f64]) -> Result<Vec<f64>> {
    let Some(first) = parts.first() else { return Ok(vec![0.0]) };
    let grid = first.grid;
    for f in parts {
        grid.check_same(&f.grid)?;
    }
    let n = grid.len();
    let norm = 1.0 / n as f64;
    let spectra: Vec<Vec<Complex64>> = parts
        .iter()
        .map(|f| {
            let mut data = f.values.clone();
            dft(&grid, &mut data, false);
            data.iter_mut().for_each(|z| *z *= norm);
            data
        })
        .collect();
    let k2 = grid.frequency_norms_sq();
    let d = grid.dim() as f64;
    let p = 2.0 * (d + 2.0) / d;
    let hd = grid.cell_volume();
    let mut rows = vec![vec![0.0; times.len()]; parts.len() + 1];
    let mut work = vec![Complex64::new(0.0, 0.0); n];
    let mut total = vec![Complex64::new(0.0, 0.0); n];
    let mut phase = vec![Complex64::new(0.0, 0.0); n];
    for (j, &t) in times.iter().enumerate() {
        phase.iter_mut().zip(&k2).for_each(|(z, k)| *z = Complex64::from_polar(1.0, -t * k));
        total.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for (m, spec) in spectra.iter().enumerate() {
            work.iter_mut().zip(spec.iter().zip(&phase)).for_each(|(w, (a, b))| *w = a * b);
            dft(&grid, &mut work, true);
            rows[m][j] = crate::grid::lp_sum(&work, p) * hd;
            total.iter_mut().zip(&work).for_each(|(a, b)| *a += b);
        }
        rows[parts.len()][j] = crate::grid::lp_sum(&total, p) * hd;
    }
    Ok(rows.iter().map(|v| trapezoid(times, v)).collect())
}

/// F(u) = μ|u|^{4/d}u.
pub fn nonlinearity(field: &Field, mu: f64) -> Field {
    let d = field.grid.dim();
    field.map(|z| z * (mu * power_4_over_d(z.norm_sqr(), d)))
}

#[inline]
fn power_4_over_d(abs_sq: f64, d: usize) -> f64 {
    if d == 1 {
        abs_sq * abs_sq
    } else {
        abs_sq
    }
}

struct Stepper {
    grid: Grid,
    mu: f64,
    norms_sq: Vec<f64>,
    step: f64,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
}

impl Stepper {
    fn new(grid: Grid, mu: f64) -> Self {
        Stepper { grid, mu, norms_sq: grid.frequency_norms_sq(), step: f64::NAN, half: vec![], full: vec![] }
    }

    fn set_step(&mut self, step: f64) {
        if step == self.step {
            return;
        }
        let scale = 1.0 / self.grid.len() as f64;
        self.half = self.norms_sq.iter().map(|&k2| Complex64::from_polar(scale, -0.5 * step * k2)).collect();
        self.full = self.norms_sq.iter().map(|&k2| Complex64::from_polar(scale, -step * k2)).collect();
        self.step = step;
    }

    fn kinetic(&self, u: &mut [Complex64], full: bool) {
        dft(&self.grid, u, false);
        let m = if full { &self.full } else { &self.half };
        for (z, w) in u.iter_mut().zip(m) {
            *z *= w;
        }
        dft(&self.grid, u, true);
    }

    fn potential(&self, u: &mut [Complex64]) {
        if self.mu == 0.0 {
            return;
        }
        let d = self.grid.dim();
        let c = -self.mu * self.step;
        for z in u.iter_mut() {
            *z *= Complex64::from_polar(1.0, c * power_4_over_d(z.norm_sqr(), d));
        }
    }

    /// `count` Strang steps with the half kinetic steps between them fused.
    fn advance(&mut self, u: &mut [Complex64], step: f64, count: usize) {
        self.set_step(step);
        self.kinetic(u, false);
        for k in 0..count {
            self.potential(u);
            if k + 1 < count {
                self.kinetic(u, true);
            }
        }
        self.kinetic(u, false);
    }
}

fn store_targets(t0: f64, span: f64, store_every: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 1usize;
    loop {
        let s = k as f64 * store_every;
        if s >= span * (1.0 - 1e-12) {
            break;
        }
        out.push(t0 + s);
        k += 1;
    }
    out.push(t0 + span);
    out
}

/// Integrates from `u0` at `t_span.0` to `t_span.1` with snapshots every
/// `store_every`. Backward spans evolve the conjugate forward in time.
/// Divergence (non-finite values, the Nyquist guard, or the step budget)
/// is reported through [`Trajectory::diverged`] with the run truncated.
pub fn evolve(u0: &Field, t_span: (f64, f64), config: &SolverConfig) -> Result<Trajectory> {
    config.validate()?;
    if config.dim != u0.grid.dim() {
        return Err(Error::InvalidArgument("solver dimension does not match the field".into()));
    }
    if !u0.is_finite() {
        return Err(Error::InvalidArgument("initial data is not finite".into()));
    }
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite()) || t0 == t1 {
        return Err(Error::InvalidArgument(format!("degenerate time span ({t0}, {t1})")));
    }
    if t1 > t0 {
        return evolve_forward(u0, t0, t1 - t0, config);
    }
    // w(s) = conj(u(t0 − s)) solves the same equation forward in s
    let w0 = u0.map(|z| z.conj());
    let fwd = evolve_forward(&w0, 0.0, t0 - t1, config)?;
    let mut times = Vec::with_capacity(fwd.times.len());
    let mut fields = Vec::with_capacity(fwd.fields.len());
    for (s, w) in fwd.times.iter().zip(&fwd.fields).rev() {
        times.push(t0 - s);
        fields.push(w.map(|z| z.conj()));
    }
    let mut traj = Trajectory::from_snapshots(config.clone(), times, fields)?;
    traj.diverged = fwd.diverged;
    Ok(traj)
}

fn evolve_forward(u0: &Field, t0: f64, span: f64, config: &SolverConfig) -> Result<Trajectory> {
    let grid = u0.grid;
    let guard = nyquist_guard(&grid);
    let mut stepper = Stepper::new(grid, config.mu.mu());
    let mut u = u0.values.clone();
    let mut times = vec![t0];
    let mut fields = vec![u0.clone()];
    let mut t = t0;
    let mut steps = 0usize;
    let mut diverged = false;
    let mut scale = current_scale(u0, config.eta_ref);

    for target in store_targets(t0, span, config.store_every) {
        let seg = target - t;
        let dt = match config.dt_policy {
            StepPolicy::Fixed => config.dt,
            StepPolicy::Adaptive => config.dt.min(config.adaptive_cap / (scale * scale)),
        };
        let count = ((seg / dt) - 1e-9).ceil().max(1.0) as usize;
        if steps + count > config.max_steps {
            diverged = true;
            break;
        }
        stepper.advance(&mut u, seg / count as f64, count);
        steps += count;
        t = target;
        let field = Field { grid, values: u.clone(), label: u0.label.clone(), diverged: false };
        if !field.is_finite() {
            diverged = true;
            break;
        }
        scale = current_scale(&field, config.eta_ref);
        times.push(t);
        fields.push(field);
        if config.nyquist_guard && scale > guard {
            diverged = true;
            break;
        }
    }
    let mut traj = Trajectory::from_snapshots(config.clone(), times, fields)?;
    traj.diverged = diverged;
    Ok(traj)
}

fn current_scale(field: &Field, eta: f64) -> f64 {
    diagnostics::scale_or_floor(field, eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{l2_distance, make_grid, mass};

    fn gaussian(grid: Grid) -> Field {
        Field::from_real_fn(grid, |x| (-x[0] * x[0]).exp())
    }

    #[test]
    fn streamed_free_sizes_match_stored_trajectories() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let a = gaussian(g);
        let b = Field::from_fn(g, |x| Complex64::from_polar((-(x[0] - 3.0).powi(2)).exp(), 2.0 * x[0]));
        let times: Vec<f64> = (0..=20).map(|k| -1.0 + 0.1 * k as f64).collect();
        let s = free_scattering_sizes(&[a.clone(), b.clone()], &times).unwrap();
        let stored = |f: &Field| scattering_size(&free_trajectory(f, &times).unwrap());
        assert!((s[0] - stored(&a)).abs() < 1e-12 * s[0]);
        assert!((s[1] - stored(&b)).abs() < 1e-12 * s[1]);
        assert!((s[2] - stored(&a.add(&b).unwrap())).abs() < 1e-12 * s[2]);
    }

    fn gaussian_on_line(x: f64, t: f64) -> Complex64 {
        let a = Complex64::new(1.0, 4.0 * t);
        a.powf(-0.5) * (-x * x / a).exp()
    }

    #[test]
    fn free_propagation_matches_periodized_closed_form() {
        // on the torus the exact solution is the sum of the line solution's images
        let g = make_grid(1, 512, 16.0).unwrap();
        let u0 = gaussian(g);
        for t in [0.1, 0.5, 1.0] {
            let exact = Field::from_fn(g, |x| (-4..=4).map(|k| gaussian_on_line(x[0] + 32.0 * k as f64, t)).sum());
            let err = l2_distance(&free_propagate(&u0, t), &exact).unwrap();
            assert!(err < 1e-8, "t = {t}: {err}");
        }
    }

    #[test]
    fn free_propagation_matches_line_closed_form_on_wide_box() {
        let g = make_grid(1, 1024, 32.0).unwrap();
        let u0 = gaussian(g);
        for t in [0.1, 0.5, 1.0] {
            let exact = Field::from_fn(g, |x| gaussian_on_line(x[0], t));
            let err = l2_distance(&free_propagate(&u0, t), &exact).unwrap();
            assert!(err < 1e-8, "t = {t}: {err}");
        }
    }

    #[test]
    fn free_propagation_is_a_unitary_group() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let f = Field::from_fn(g, |x| Complex64::from_polar((-x[0] * x[0] / 3.0).exp(), 0.5 * x[0]));
        let a = free_propagate(&free_propagate(&f, 0.3), 0.45);
        let b = free_propagate(&f, 0.75);
        assert!(l2_distance(&a, &b).unwrap() < 1e-11);
        assert!((mass(&a) - mass(&f)).abs() < 1e-12 * mass(&f));
        assert!(l2_distance(&free_propagate(&f, 0.0), &f).unwrap() == 0.0);
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = make_grid(1, 64, 8.0).unwrap();
        let cfg = SolverConfig::new(Nonlinearity::Focusing, 1, 1e-2);
        let traj = evolve(&Field::zeros(g), (0.0, 1.0), &cfg).unwrap();
        assert!(!traj.diverged);
        assert_eq!(traj.mass_drift, 0.0);
        assert!(traj.fields.iter().all(|f| f.max_abs() == 0.0));
        assert_eq!(traj.times.len(), 101);
    }

    #[test]
    fn snapshot_times_hit_the_endpoint() {
        let targets = store_targets(0.0, 0.25, 0.1);
        assert_eq!(targets.len(), 3);
        assert_eq!(*targets.last().unwrap(), 0.25);
    }

    #[test]
    fn linear_branch_reproduces_free_flow() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let u0 = gaussian(g);
        let cfg = SolverConfig::new(Nonlinearity::Linear, 1, 0.05);
        let traj = evolve(&u0, (0.0, 0.5), &cfg).unwrap();
        let err = l2_distance(traj.fields.last().unwrap(), &free_propagate(&u0, 0.5)).unwrap();
        assert!(err < 1e-12);
    }

    #[test]
    fn backward_run_has_increasing_times() {
        let g = make_grid(1, 128, 12.0).unwrap();
        let cfg = SolverConfig::new(Nonlinearity::Defocusing, 1, 1e-3).with_store_every(0.05);
        let traj = evolve(&gaussian(g), (0.0, -0.3), &cfg).unwrap();
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(traj.times[0], -0.3);
        assert_eq!(*traj.times.last().unwrap(), 0.0);
        assert!(l2_distance(traj.fields.last().unwrap(), &gaussian(g)).unwrap() < 1e-15);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let g = make_grid(1, 64, 8.0).unwrap();
        let mut cfg = SolverConfig::new(Nonlinearity::Focusing, 1, 0.0);
        assert!(evolve(&gaussian(g), (0.0, 1.0), &cfg).is_err());
        cfg.dt = 1e-3;
        cfg.max_steps = 0;
        assert!(evolve(&gaussian(g), (0.0, 1.0), &cfg).is_err());
        cfg.max_steps = 10;
        let traj = evolve(&gaussian(g), (0.0, 1.0), &cfg).unwrap();
        assert!(traj.diverged);
    }
}
