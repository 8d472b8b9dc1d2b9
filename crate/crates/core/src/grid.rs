//! Periodic box discretization of ℝ^d, the continuous Fourier convention
//! f̂(ξ) = ∫ e^{-ix·ξ} f(x) dx, and the elementary L²/Lᵖ functionals.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform sampling of the box [-L, L)^d with `n` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
    half_width: f64,
}

/// Builds a grid, rejecting anything but d ∈ {1, 2} and power-of-two n ≥ 8.
pub fn make_grid(dim: usize, points_per_axis: usize, box_halfwidth: f64) -> Result<Grid> {
    Grid::new(dim, points_per_axis, box_halfwidth)
}

impl Grid {
    pub fn new(dim: usize, n: usize, half_width: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis {n} must be a power of two >= 8"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidGrid(format!("box half-width {half_width} must be positive")));
        }
        Ok(Grid { dim, n, half_width })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Number of sites n^d.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Frequency lattice spacing π/L.
    pub fn dxi(&self) -> f64 {
        PI / self.half_width
    }

    /// Largest lattice frequency magnitude along one axis, nπ/(2L).
    pub fn nyquist(&self) -> f64 {
        self.n as f64 * PI / (2.0 * self.half_width)
    }

    /// Volume element h^d.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Frequency volume element (π/L)^d.
    pub fn frequency_cell_volume(&self) -> f64 {
        self.dxi().powi(self.dim as i32)
    }

    /// Coordinate of node `j` along any axis.
    pub fn coord(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    /// Signed lattice index of FFT-ordered position `j` (−n/2 ≤ k < n/2).
    pub fn signed_index(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Lattice frequency of FFT-ordered position `j` along any axis.
    pub fn wavenumber(&self, j: usize) -> f64 {
        self.signed_index(j) as f64 * self.dxi()
    }

    /// Multi-index of flat site `i` (row-major, axis 0 slowest).
    pub fn unravel(&self, i: usize) -> [usize; 2] {
        if self.dim == 1 {
            [i, 0]
        } else {
            [i / self.n, i % self.n]
        }
    }

    /// Physical position of flat site `i`.
    pub fn position(&self, i: usize) -> [f64; 2] {
        let [a, b] = self.unravel(i);
        if self.dim == 1 {
            [self.coord(a), 0.0]
        } else {
            [self.coord(a), self.coord(b)]
        }
    }

    /// Frequency of flat spectral index `i`.
    pub fn frequency(&self, i: usize) -> [f64; 2] {
        let [a, b] = self.unravel(i);
        if self.dim == 1 {
            [self.wavenumber(a), 0.0]
        } else {
            [self.wavenumber(a), self.wavenumber(b)]
        }
    }

    pub fn frequency_norm_sq(&self, i: usize) -> f64 {
        let [a, b] = self.frequency(i);
        a * a + b * b
    }

    /// |ξ|² for every spectral index.
    pub fn frequency_norms_sq(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.frequency_norm_sq(i)).collect()
    }

    /// Sites with |x|_∞ > L/2.
    pub fn is_outer(&self, i: usize) -> bool {
        let p = self.position(i);
        let half = self.half_width / 2.0;
        p[..self.dim].iter().any(|c| c.abs() > half)
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// Complex samples of an L² function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub values: Vec<Complex64>,
    pub label: Option<String>,
    /// Set when an operation could not represent its result on the grid.
    pub diverged: bool,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Field {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            label: None,
            diverged: false,
        }
    }

    pub fn from_values(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Field { grid, values, label: None, diverged: false })
    }

    /// Samples `f` at every site.
    pub fn from_fn<F: Fn([f64; 2]) -> Complex64>(grid: Grid, f: F) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Field { grid, values, label: None, diverged: false }
    }

    pub fn from_real_fn<F: Fn([f64; 2]) -> f64>(grid: Grid, f: F) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, c: Complex64) -> Field {
        self.map(|z| z * c)
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&z| f(z)).collect(),
            label: self.label.clone(),
            diverged: self.diverged,
        }
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip(other, |a, b| a - b)
    }

    pub fn zip<F: Fn(Complex64, Complex64) -> Complex64>(&self, other: &Field, f: F) -> Result<Field> {
        self.grid.check_same(&other.grid)?;
        Ok(Field {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            label: None,
            diverged: self.diverged || other.diverged,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Circular shift by whole cells along each axis.
    pub fn roll(&self, shift: [i64; 2]) -> Field {
        let n = self.grid.n as i64;
        let mut out = Field::zeros(self.grid);
        out.label = self.label.clone();
        for i in 0..self.grid.len() {
            let [a, b] = self.grid.unravel(i);
            let ta = (a as i64 + shift[0]).rem_euclid(n) as usize;
            let j = if self.grid.dim == 1 {
                ta
            } else {
                ta * self.grid.n + (b as i64 + shift[1]).rem_euclid(n) as usize
            };
            out.values[j] = self.values[i];
        }
        out
    }

    /// Mirror image f(−x) on the lattice (node j ↦ n − j).
    pub fn reflect(&self) -> Field {
        let n = self.grid.n;
        let mut out = Field::zeros(self.grid);
        for i in 0..self.grid.len() {
            let [a, b] = self.grid.unravel(i);
            let ra = (n - a) % n;
            let j = if self.grid.dim == 1 { ra } else { ra * n + (n - b) % n };
            out.values[j] = self.values[i];
        }
        out
    }
}

/// Samples of f̂ on the frequency lattice, stored in FFT order
/// (see [`Grid::frequency`]).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid: Grid,
    pub coeffs: Vec<Complex64>,
}

impl Spectrum {
    /// (2π)^{-d} Σ|f̂|² (Δξ)^d, which equals the mass by Plancherel.
    pub fn plancherel_mass(&self) -> f64 {
        let w = self.grid.frequency_cell_volume() / (2.0 * PI).powi(self.grid.dim as i32);
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>() * w
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Unnormalized in-place DFT over all axes (forward kernel e^{-2πijk/n}).
pub(crate) fn dft(grid: &Grid, data: &mut [Complex64], inverse: bool) {
    let n = grid.n;
    let fft = plan(n, inverse);
    fft.process(data);
    if grid.dim == 2 {
        let mut t = transpose(data, n);
        fft.process(&mut t);
        let back = transpose(&t, n);
        data.copy_from_slice(&back);
    }
}

/// 1-D unnormalized DFT of arbitrary power-of-two length.
pub(crate) fn dft_1d(data: &mut [Complex64], inverse: bool) {
    let fft = plan(data.len(), inverse);
    fft.process(data);
}

fn transpose(data: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for r in 0..n {
        for c in 0..n {
            out[c * n + r] = data[r * n + c];
        }
    }
    out
}

fn checkerboard_sign(grid: &Grid, i: usize) -> f64 {
    let [a, b] = grid.unravel(i);
    if (a + b) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Discrete approximation of f̂(ξ) = ∫ e^{-ix·ξ} f(x) dx at the lattice nodes.
pub fn fourier(field: &Field) -> Spectrum {
    let grid = field.grid;
    let mut data = field.values.clone();
    dft(&grid, &mut data, false);
    let hd = grid.cell_volume();
    // x_0 = -L contributes e^{iLξ_k} = (-1)^k per axis
    for (i, z) in data.iter_mut().enumerate() {
        *z *= hd * checkerboard_sign(&grid, i);
    }
    Spectrum { grid, coeffs: data }
}

pub fn inverse_fourier(spectrum: &Spectrum) -> Field {
    let grid = spectrum.grid;
    let mut data: Vec<Complex64> = spectrum
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, &z)| z * checkerboard_sign(&grid, i))
        .collect();
    dft(&grid, &mut data, true);
    let w = (1.0 / (2.0 * grid.half_width)).powi(grid.dim as i32);
    for z in data.iter_mut() {
        *z *= w;
    }
    Field { grid, values: data, label: None, diverged: false }
}

/// Applies the Fourier multiplier m(ξ), given per flat spectral index.
pub fn apply_multiplier<F>(field: &Field, multiplier: F) -> Field
where
    F: Fn(usize) -> Complex64,
{
    let grid = field.grid;
    let mut data = field.values.clone();
    dft(&grid, &mut data, false);
    let norm = 1.0 / grid.len() as f64;
    for (i, z) in data.iter_mut().enumerate() {
        *z *= multiplier(i) * norm;
    }
    dft(&grid, &mut data, true);
    Field { grid, values: data, label: field.label.clone(), diverged: field.diverged }
}

/// M(f) = Σ|f|² h^d.
pub fn mass(field: &Field) -> f64 {
    field.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * field.grid.cell_volume()
}

/// ⟨f, g⟩ = Σ f ḡ h^d.
pub fn inner(f: &Field, g: &Field) -> Result<Complex64> {
    f.grid.check_same(&g.grid)?;
    let s: Complex64 = f.values.iter().zip(&g.values).map(|(a, b)| a * b.conj()).sum();
    Ok(s * f.grid.cell_volume())
}

pub fn l2_norm(field: &Field) -> f64 {
    mass(field).sqrt()
}

/// L² distance ‖f − g‖₂.
pub fn l2_distance(f: &Field, g: &Field) -> Result<f64> {
    f.grid.check_same(&g.grid)?;
    let s: f64 = f.values.iter().zip(&g.values).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok((s * f.grid.cell_volume()).sqrt())
}

/// ∫|f|^p dx as a Riemann sum.
pub fn lp_integral(field: &Field, p: f64) -> f64 {
    lp_sum(&field.values, p) * field.grid.cell_volume()
}

pub(crate) fn lp_sum(values: &[Complex64], p: f64) -> f64 {
    let half = p / 2.0;
    if half.fract() == 0.0 && (1.0..=8.0).contains(&half) {
        let k = half as i32;
        values.iter().map(|z| z.norm_sqr().powi(k)).sum()
    } else {
        values.iter().map(|z| z.norm().powf(p)).sum()
    }
}

/// (Σ|f|^p h^d)^{1/p}; p < 1 is rejected.
pub fn lp_norm(field: &Field, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("Lebesgue exponent {p} < 1")));
    }
    Ok(lp_integral(field, p).powf(1.0 / p))
}

/// Mass carried by sites with |x|_∞ > L/2.
pub fn boundary_mass(field: &Field) -> f64 {
    let g = &field.grid;
    (0..g.len())
        .filter(|&i| g.is_outer(i))
        .map(|i| field.values[i].norm_sqr())
        .sum::<f64>()
        * g.cell_volume()
}

/// Boundary mass as a fraction of total mass (0 for the zero field).
pub fn boundary_fraction(field: &Field) -> f64 {
    let m = mass(field);
    if m > 0.0 {
        boundary_mass(field) / m
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn make_grid_derived_quantities() {
        let g = make_grid(1, 256, 16.0).unwrap();
        assert_eq!(g.spacing(), 0.125);
        assert_relative_eq!(g.dxi(), PI / 16.0);
        assert_relative_eq!(g.dxi(), 0.19635, epsilon = 1e-5);
        assert_eq!(g.spacing() * 256.0, 32.0);
        assert_eq!(make_grid(2, 64, 8.0).unwrap().len(), 4096);
    }

    #[test]
    fn make_grid_rejects_bad_input() {
        assert!(make_grid(1, 100, 16.0).is_err());
        assert!(make_grid(3, 64, 16.0).is_err());
        assert!(make_grid(1, 4, 16.0).is_err());
        assert!(make_grid(1, 64, 0.0).is_err());
    }

    #[test]
    fn lattice_is_symmetric_but_for_one_mode() {
        let g = make_grid(1, 16, 4.0).unwrap();
        let ks: Vec<i64> = (0..16).map(|j| g.signed_index(j)).collect();
        assert_eq!(*ks.iter().min().unwrap(), -8);
        assert_eq!(*ks.iter().max().unwrap(), 7);
        for &k in &ks {
            if k != -8 {
                assert!(ks.contains(&-k));
            }
        }
    }

    #[test]
    fn gaussian_transform_matches_closed_form() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let f = Field::from_real_fn(g, |x| (-x[0] * x[0]).exp());
        let s = fourier(&f);
        let mut worst: f64 = 0.0;
        for (i, z) in s.coeffs.iter().enumerate() {
            let xi = g.wavenumber(i);
            let exact = PI.sqrt() * (-xi * xi / 4.0).exp();
            if exact > 1e-3 {
                worst = worst.max((z - exact).norm() / exact);
            }
        }
        assert!(worst < 1e-8, "worst relative error {worst}");
    }

    #[test]
    fn lattice_exponential_is_a_single_mode() {
        let g = make_grid(1, 64, 8.0).unwrap();
        let k = 5usize;
        let xi = g.wavenumber(k);
        let f = Field::from_fn(g, |x| Complex64::from_polar(1.0, xi * x[0]));
        let s = fourier(&f);
        let peak = s.coeffs[k].norm();
        for (i, z) in s.coeffs.iter().enumerate() {
            if i != k {
                assert!(z.norm() < 1e-12 * peak);
            }
        }
    }

    #[test]
    fn gaussian_mass_is_root_pi() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let f = Field::from_real_fn(g, |x| (-x[0] * x[0] / 2.0).exp());
        assert_relative_eq!(mass(&f), PI.sqrt(), max_relative = 1e-10);
        assert_relative_eq!(mass(&Field::zeros(g)), 0.0);
        let c = Complex64::new(0.3, -1.7);
        assert_relative_eq!(mass(&f.scale(c)), c.norm_sqr() * mass(&f), max_relative = 1e-14);
    }

    #[test]
    fn single_cell_lp_norm() {
        let g = make_grid(2, 16, 2.0).unwrap();
        let mut f = Field::zeros(g);
        f.values[37] = Complex64::new(1.0, 0.0);
        for p in [1.0, 2.0, 3.5, 6.0] {
            assert_relative_eq!(lp_norm(&f, p).unwrap(), g.spacing().powf(2.0 / p), max_relative = 1e-14);
        }
        assert!(lp_norm(&f, 0.5).is_err());
    }

    #[test]
    fn boundary_monitor_sees_outer_region_only() {
        let g = make_grid(1, 64, 8.0).unwrap();
        let inner = Field::from_real_fn(g, |x| (-x[0] * x[0]).exp());
        assert!(boundary_fraction(&inner) < 1e-12);
        let outer = Field::from_real_fn(g, |x| (-(x[0] - 6.0).powi(2)).exp());
        assert!(boundary_fraction(&outer) > 0.9);
    }

    #[test]
    fn reflection_and_roll_are_permutations() {
        let g = make_grid(2, 8, 2.0).unwrap();
        let f = Field::from_fn(g, |x| Complex64::new(x[0] + 0.1, x[1] * x[0]));
        assert_relative_eq!(mass(&f.reflect()), mass(&f), max_relative = 1e-15);
        assert_eq!(f.reflect().reflect(), f);
        assert_eq!(f.roll([3, -2]).roll([-3, 2]).values, f.values);
    }
}
