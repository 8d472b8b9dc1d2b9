//! The symmetry group G (phase, Galilean modulation, translation, dilation),
//! its enlargement G′ by free propagators, the radial subgroups, and their
//! actions on fields and trajectories.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{apply_multiplier, Field};
use crate::propagator::{free_propagate, Trajectory};
use crate::resample::resample_affine;

/// Spectral mass fraction above which a resampled field is flagged as
/// unrepresentable on the grid.
pub const UNRESOLVED_TOL: f64 = 1e-8;

/// g_{θ, ξ₀, x₀, λ} f(x) = λ^{-d/2} e^{iθ} e^{ix·ξ₀} f((x − x₀)/λ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub theta: f64,
    pub xi0: Vec<f64>,
    pub x0: Vec<f64>,
    pub lambda: f64,
}

/// g_{θ, ξ₀, x₀, λ, t₀} = g_{θ, ξ₀, x₀, λ} e^{it₀Δ}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnlargedElement {
    #[serde(flatten)]
    pub base: GroupElement,
    #[serde(default)]
    pub t0: f64,
}

/// Element of G_rad (or G′_rad when `t0` is set): ξ₀ = x₀ = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialElement {
    pub theta: f64,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
}

fn reduce_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl GroupElement {
    pub fn new(theta: f64, xi0: Vec<f64>, x0: Vec<f64>, lambda: f64) -> Result<Self> {
        let d = xi0.len();
        if d != 1 && d != 2 {
            return Err(Error::InvalidArgument(format!("group element dimension {d} not in {{1, 2}}")));
        }
        if x0.len() != d {
            return Err(Error::InvalidArgument("x0 and xi0 have different lengths".into()));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("dilation {lambda} must be positive")));
        }
        if !theta.is_finite() || xi0.iter().chain(&x0).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite group parameter".into()));
        }
        Ok(GroupElement { theta: reduce_angle(theta), xi0, x0, lambda })
    }

    pub fn identity(dim: usize) -> Self {
        GroupElement { theta: 0.0, xi0: vec![0.0; dim], x0: vec![0.0; dim], lambda: 1.0 }
    }

    pub fn phase(theta: f64, dim: usize) -> Self {
        GroupElement { theta: reduce_angle(theta), ..Self::identity(dim) }
    }

    pub fn modulation(xi0: Vec<f64>) -> Self {
        let d = xi0.len();
        GroupElement { xi0, ..Self::identity(d) }
    }

    pub fn translation(x0: Vec<f64>) -> Self {
        let d = x0.len();
        GroupElement { x0, ..Self::identity(d) }
    }

    pub fn dilation(lambda: f64, dim: usize) -> Self {
        GroupElement { lambda, ..Self::identity(dim) }
    }

    pub fn dim(&self) -> usize {
        self.xi0.len()
    }

    pub fn enlarge(self, t0: f64) -> EnlargedElement {
        EnlargedElement { base: self, t0 }
    }

    /// Largest absolute parameter difference, with θ compared on the circle.
    pub fn max_param_diff(&self, other: &GroupElement) -> f64 {
        let dt = (self.theta - other.theta).rem_euclid(TAU);
        let mut m = dt.min(TAU - dt);
        for (a, b) in self.xi0.iter().zip(&other.xi0).chain(self.x0.iter().zip(&other.x0)) {
            m = m.max((a - b).abs());
        }
        m.max((self.lambda - other.lambda).abs())
    }
}

/// g g′ = g_{θ + θ′ − x₀·ξ₀′/λ, ξ₀ + ξ₀′/λ, x₀ + λx₀′, λλ′}.
pub fn compose(g: &GroupElement, h: &GroupElement) -> GroupElement {
    let theta = g.theta + h.theta - dot(&g.x0, &h.xi0) / g.lambda;
    let xi0 = g.xi0.iter().zip(&h.xi0).map(|(a, b)| a + b / g.lambda).collect();
    let x0 = g.x0.iter().zip(&h.x0).map(|(a, b)| a + g.lambda * b).collect();
    GroupElement { theta: reduce_angle(theta), xi0, x0, lambda: g.lambda * h.lambda }
}

/// g⁻¹ = g_{−θ − x₀·ξ₀, −λξ₀, −x₀/λ, 1/λ}.
pub fn inverse(g: &GroupElement) -> GroupElement {
    GroupElement {
        theta: reduce_angle(-g.theta - dot(&g.x0, &g.xi0)),
        xi0: g.xi0.iter().map(|v| -g.lambda * v).collect(),
        x0: g.x0.iter().map(|v| -v / g.lambda).collect(),
        lambda: 1.0 / g.lambda,
    }
}

fn check_dim(g: &GroupElement, field: &Field) -> Result<()> {
    if g.dim() != field.grid.dim() {
        return Err(Error::InvalidArgument(format!(
            "group element of dimension {} applied to a {}-dimensional field",
            g.dim(),
            field.grid.dim()
        )));
    }
    Ok(())
}

/// Action of g on a field. Translation at unit scale is a spectral phase
/// shift; any other dilation evaluates the band-limited interpolant at
/// (x − x₀)/λ. Output is flagged `diverged` if the dilation pushes spectral
/// content past the Nyquist band.
pub fn apply(g: &GroupElement, field: &Field) -> Result<Field> {
    check_dim(g, field)?;
    let grid = field.grid;
    let d = grid.dim();
    let mut shift = [0.0; 2];
    shift[..d].copy_from_slice(&g.x0);

    let mut out = if g.lambda == 1.0 {
        if shift == [0.0, 0.0] {
            field.clone()
        } else {
            apply_multiplier(field, |i| {
                let xi = grid.frequency(i);
                Complex64::from_polar(1.0, -(xi[0] * shift[0] + xi[1] * shift[1]))
            })
        }
    } else {
        let (r, lost) = resample_affine(field, shift, g.lambda);
        let mut r = r;
        if lost > UNRESOLVED_TOL {
            r.diverged = true;
        }
        r
    };

    let amp = g.lambda.powf(-(d as f64) / 2.0);
    for (i, z) in out.values.iter_mut().enumerate() {
        let x = grid.position(i);
        let phase = g.theta + dot(&x[..d], &g.xi0);
        *z *= Complex64::from_polar(amp, phase);
    }
    out.label = field.label.clone();
    Ok(out)
}

/// g′ f = g (e^{it₀Δ} f).
pub fn apply_enlarged(g: &EnlargedElement, field: &Field) -> Result<Field> {
    apply(&g.base, &free_propagate(field, g.t0))
}

/// T_g u(t) = g_{θ − t|ξ₀|², ξ₀, x₀ + 2ξ₀t, λ}(u(t/λ²)), sampled at the
/// rescaled snapshot times λ²t.
pub fn apply_trajectory(g: &GroupElement, traj: &Trajectory) -> Result<Trajectory> {
    let xi_sq = dot(&g.xi0, &g.xi0);
    let lam2 = g.lambda * g.lambda;
    let mut times = Vec::with_capacity(traj.times.len());
    let mut fields = Vec::with_capacity(traj.fields.len());
    for (&s, u) in traj.times.iter().zip(&traj.fields) {
        let t = lam2 * s;
        let gt = GroupElement {
            theta: reduce_angle(g.theta - t * xi_sq),
            xi0: g.xi0.clone(),
            x0: g.x0.iter().zip(&g.xi0).map(|(x, xi)| x + 2.0 * xi * t).collect(),
            lambda: g.lambda,
        };
        times.push(t);
        fields.push(apply(&gt, u)?);
    }
    let mut out = Trajectory::from_snapshots(traj.config.clone(), times, fields)?;
    out.diverged |= traj.diverged;
    Ok(out)
}

/// Free evolution of `profile` transported by g′ and sampled at `times`:
/// t ↦ g_{θ − t|ξ₀|², ξ₀, x₀ + 2ξ₀t, λ}(e^{i(t₀ + t/λ²)Δ} profile).
pub fn enlarged_free_trajectory(g: &EnlargedElement, profile: &Field, times: &[f64]) -> Result<Trajectory> {
    let base = &g.base;
    let xi_sq = dot(&base.xi0, &base.xi0);
    let lam2 = base.lambda * base.lambda;
    let mut fields = Vec::with_capacity(times.len());
    for &t in times {
        let gt = GroupElement {
            theta: reduce_angle(base.theta - t * xi_sq),
            xi0: base.xi0.clone(),
            x0: base.x0.iter().zip(&base.xi0).map(|(x, xi)| x + 2.0 * xi * t).collect(),
            lambda: base.lambda,
        };
        fields.push(apply(&gt, &free_propagate(profile, g.t0 + t / lam2))?);
    }
    Trajectory::from_snapshots(
        crate::propagator::SolverConfig::linear(profile.grid.dim()),
        times.to_vec(),
        fields,
    )
}

/// λₐ/λ_b + λ_b/λₐ + |tₐλₐ² − t_bλ_b²| + |ξₐ − ξ_b| + |xₐ − x_b|.
pub fn separation(a: &EnlargedElement, b: &EnlargedElement) -> f64 {
    let (la, lb) = (a.base.lambda, b.base.lambda);
    let dist = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    la / lb + lb / la
        + (a.t0 * la * la - b.t0 * lb * lb).abs()
        + dist(&a.base.xi0, &b.base.xi0)
        + dist(&a.base.x0, &b.base.x0)
}

/// ‖ |a|^{1−θ} |b|^θ ‖ in L^{2(d+2)/d}_{t,x}, trapezoid in time.
pub fn mixed_norm(a: &Trajectory, b: &Trajectory, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidArgument(format!("mixing exponent {theta} not in (0, 1)")));
    }
    if a.times != b.times {
        return Err(Error::InvalidArgument("trajectories sampled at different times".into()));
    }
    let grid = a.grid();
    grid.check_same(&b.grid())?;
    let d = grid.dim() as f64;
    let p = 2.0 * (d + 2.0) / d;
    let vals: Vec<f64> = a
        .fields
        .iter()
        .zip(&b.fields)
        .map(|(u, v)| {
            u.values
                .iter()
                .zip(&v.values)
                .map(|(x, y)| (x.norm().powf(1.0 - theta) * y.norm().powf(theta)).powf(p))
                .sum::<f64>()
                * grid.cell_volume()
        })
        .collect();
    Ok(crate::propagator::trapezoid(&a.times, &vals).powf(1.0 / p))
}

impl EnlargedElement {
    pub fn identity(dim: usize) -> Self {
        GroupElement::identity(dim).enlarge(0.0)
    }
}

impl RadialElement {
    pub fn new(theta: f64, lambda: f64, t0: Option<f64>) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("dilation {lambda} must be positive")));
        }
        Ok(RadialElement { theta: reduce_angle(theta), lambda, t0 })
    }

    pub fn to_group(&self, dim: usize) -> GroupElement {
        GroupElement { theta: self.theta, xi0: vec![0.0; dim], x0: vec![0.0; dim], lambda: self.lambda }
    }

    pub fn to_enlarged(&self, dim: usize) -> EnlargedElement {
        self.to_group(dim).enlarge(self.t0.unwrap_or(0.0))
    }
}
