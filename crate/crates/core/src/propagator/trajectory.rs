use crate::error::{Error, Result};
use crate::grid::{boundary_fraction, lp_integral, mass, Field, Grid};

use super::SolverConfig;

/// Time-ordered snapshots of a (numerical) solution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: SolverConfig,
    pub times: Vec<f64>,
    pub fields: Vec<Field>,
    pub diverged: bool,
    /// Largest fraction of mass found outside the inner half of the box.
    pub boundary_mass_max: f64,
    /// max_t |M(u(t)) − M(u(t₀))| / M(u(t₀)); zero for the zero solution.
    pub mass_drift: f64,
}

impl Trajectory {
    pub fn from_snapshots(config: SolverConfig, times: Vec<f64>, fields: Vec<Field>) -> Result<Self> {
        if times.is_empty() || times.len() != fields.len() {
            return Err(Error::InvalidArgument(format!(
                "{} times for {} snapshots",
                times.len(),
                fields.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("snapshot times must be strictly increasing".into()));
        }
        let grid = fields[0].grid;
        for f in &fields {
            grid.check_same(&f.grid)?;
        }
        let masses: Vec<f64> = fields.iter().map(mass).collect();
        let m0 = masses[0];
        let mass_drift = if m0 > 0.0 {
            masses.iter().map(|m| (m - m0).abs() / m0).fold(0.0, f64::max)
        } else {
            0.0
        };
        let boundary_mass_max = fields.iter().map(boundary_fraction).fold(0.0, f64::max);
        let diverged = fields.iter().any(|f| f.diverged);
        Ok(Trajectory { config, times, fields, diverged, boundary_mass_max, mass_drift })
    }

    pub fn grid(&self) -> Grid {
        self.fields[0].grid
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Index of the snapshot stored at time `t` (relative tolerance 1e-9).
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let tol = 1e-9 * (self.end() - self.start()).abs().max(1.0);
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= tol)
            .ok_or(Error::NotASnapshot(t))
    }

    pub fn field_at(&self, t: f64) -> Result<&Field> {
        Ok(&self.fields[self.index_of(t)?])
    }

    /// Snapshots with times in [a, b].
    pub fn restrict(&self, a: f64, b: f64) -> Result<Trajectory> {
        let tol = 1e-12 * (self.end() - self.start()).abs().max(1.0);
        let (times, fields): (Vec<f64>, Vec<Field>) = self
            .times
            .iter()
            .zip(&self.fields)
            .filter(|(&t, _)| t >= a - tol && t <= b + tol)
            .map(|(&t, f)| (t, f.clone()))
            .unzip();
        let mut out = Trajectory::from_snapshots(self.config.clone(), times, fields)?;
        out.diverged |= self.diverged;
        Ok(out)
    }

    /// Pointwise difference of two trajectories sampled at the same times.
    pub fn difference(&self, other: &Trajectory) -> Result<Trajectory> {
        if self.times.len() != other.times.len()
            || self.times.iter().zip(&other.times).any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0))
        {
            return Err(Error::InvalidArgument("trajectories sampled at different times".into()));
        }
        let fields = self
            .fields
            .iter()
            .zip(&other.fields)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Trajectory::from_snapshots(self.config.clone(), self.times.clone(), fields)
    }

    /// Pointwise sum of trajectories sampled at the same times.
    pub fn sum(parts: &[Trajectory]) -> Result<Trajectory> {
        let first = parts.first().ok_or_else(|| Error::InvalidArgument("empty sum".into()))?;
        let mut fields = first.fields.clone();
        for p in &parts[1..] {
            if p.times != first.times {
                return Err(Error::InvalidArgument("trajectories sampled at different times".into()));
            }
            for (acc, f) in fields.iter_mut().zip(&p.fields) {
                *acc = acc.add(f)?;
            }
        }
        Trajectory::from_snapshots(first.config.clone(), first.times.clone(), fields)
    }

    pub fn masses(&self) -> Vec<f64> {
        self.fields.iter().map(mass).collect()
    }

    pub(crate) fn lp_integrals(&self, p: f64) -> Vec<f64> {
        self.fields.iter().map(|f| lp_integral(f, p)).collect()
    }
}

/// Trapezoid rule over (possibly nonuniform) nodes.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Integral of the piecewise-linear interpolant of `values` over [a, b].
fn trapezoid_between(times: &[f64], values: &[f64], a: f64, b: f64) -> f64 {
    let mut total = 0.0;
    for (t, v) in times.windows(2).zip(values.windows(2)) {
        let lo = t[0].max(a);
        let hi = t[1].min(b);
        if hi <= lo {
            continue;
        }
        let lerp = |s: f64| v[0] + (v[1] - v[0]) * (s - t[0]) / (t[1] - t[0]);
        total += 0.5 * (hi - lo) * (lerp(lo) + lerp(hi));
    }
    total
}

fn scattering_exponent(grid: &Grid) -> f64 {
    let d = grid.dim() as f64;
    2.0 * (d + 2.0) / d
}

/// (∫∫|u|^p dx dt)^{1/p}, trapezoid in time.
pub fn spacetime_lp_norm(traj: &Trajectory, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("Lebesgue exponent {p} < 1")));
    }
    Ok(trapezoid(&traj.times, &traj.lp_integrals(p)).powf(1.0 / p))
}

/// S(u) = ∫∫|u|^{2(d+2)/d} dx dt over the stored interval.
pub fn scattering_size(traj: &Trajectory) -> f64 {
    let p = scattering_exponent(&traj.grid());
    trapezoid(&traj.times, &traj.lp_integrals(p))
}

/// S_{≥t}(u): the scattering size over [t, end].
pub fn scattering_size_after(traj: &Trajectory, t: f64) -> Result<f64> {
    check_inside(traj, t)?;
    let p = scattering_exponent(&traj.grid());
    Ok(trapezoid_between(&traj.times, &traj.lp_integrals(p), t, traj.end()))
}

/// S_{≤t}(u): the scattering size over [start, t].
pub fn scattering_size_before(traj: &Trajectory, t: f64) -> Result<f64> {
    check_inside(traj, t)?;
    let p = scattering_exponent(&traj.grid());
    Ok(trapezoid_between(&traj.times, &traj.lp_integrals(p), traj.start(), t))
}

fn check_inside(traj: &Trajectory, t: f64) -> Result<()> {
    if t < traj.start() || t > traj.end() {
        return Err(Error::InvalidArgument(format!(
            "time {t} outside [{}, {}]",
            traj.start(),
            traj.end()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::propagator::free_trajectory;
    use num_complex::Complex64;

    fn sample() -> Trajectory {
        let g = make_grid(1, 128, 16.0).unwrap();
        let u0 = Field::from_fn(g, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0));
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.025).collect();
        free_trajectory(&u0, &times).unwrap()
    }

    #[test]
    fn split_identity_holds() {
        let traj = sample();
        let s = scattering_size(&traj);
        for t in [0.0, 0.3, 0.5125, 1.0] {
            let sum = scattering_size_before(&traj, t).unwrap() + scattering_size_after(&traj, t).unwrap();
            assert!((sum - s).abs() < 1e-12 * s);
        }
        assert!(scattering_size_after(&traj, 2.0).is_err());
    }

    #[test]
    fn additive_over_concatenation() {
        let traj = sample();
        let a = traj.restrict(0.0, 0.5).unwrap();
        let b = traj.restrict(0.5, 1.0).unwrap();
        let s = scattering_size(&traj);
        assert!((scattering_size(&a) + scattering_size(&b) - s).abs() < 1e-13 * s);
    }

    #[test]
    fn zero_trajectory_has_no_size() {
        let g = make_grid(1, 64, 8.0).unwrap();
        let traj = free_trajectory(&Field::zeros(g), &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(scattering_size(&traj), 0.0);
    }

    #[test]
    fn time_constant_norm() {
        let g = make_grid(1, 64, 8.0).unwrap();
        let f = Field::from_fn(g, |x| Complex64::new((-x[0] * x[0]).exp(), 0.2));
        let times: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let traj = Trajectory::from_snapshots(
            crate::propagator::SolverConfig::linear(1),
            times,
            vec![f.clone(); 11],
        )
        .unwrap();
        let a = spacetime_lp_norm(&traj, 6.0).unwrap();
        let b = crate::grid::lp_norm(&f, 6.0).unwrap();
        assert!((a - b).abs() < 1e-12 * b);
        assert!(spacetime_lp_norm(&traj, 0.9).is_err());
    }

    #[test]
    fn rejects_unordered_times() {
        let g = make_grid(1, 64, 8.0).unwrap();
        let f = Field::zeros(g);
        let cfg = crate::propagator::SolverConfig::linear(1);
        assert!(Trajectory::from_snapshots(cfg.clone(), vec![0.0, 0.0], vec![f.clone(), f.clone()]).is_err());
        assert!(Trajectory::from_snapshots(cfg, vec![0.0], vec![f.clone(), f]).is_err());
    }
}
