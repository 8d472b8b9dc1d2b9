//! Concentration parameters x(t), ξ(t), N(t), the C(η) table of a track,
//! Littlewood–Paley projections, and quantitative frequency-localization,
//! bilinear, negative-regularity and Galilean diagnostics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::grid::{apply_multiplier, dft, l2_norm, lp_norm, mass, Field, Grid};
use crate::propagator::{evolve, linear_defect_norm, spacetime_lp_norm, SolverConfig, Trajectory};
use crate::symmetry::{apply, GroupElement};

/// Fields with less mass than this have no meaningful centers or scale.
pub const MASS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffShape {
    Sharp,
    /// cos² transition over one octave in log₂|ξ|: 1 below N/2, 0 above N.
    RaisedCosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectorKind {
    /// P_{≤N}
    Low,
    /// P_{>N} = 1 − P_{≤N}
    High,
    /// P_N = P_{≤N} − P_{≤N/2}
    Band,
    /// P_{lower<·≤N} = P_{≤N} − P_{≤lower}
    Between { lower: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LPProjector {
    pub cutoff_scale: f64,
    pub shape: CutoffShape,
    pub kind: ProjectorKind,
}

impl LPProjector {
    pub fn low(n: f64, shape: CutoffShape) -> Self {
        LPProjector { cutoff_scale: n, shape, kind: ProjectorKind::Low }
    }

    pub fn high(n: f64, shape: CutoffShape) -> Self {
        LPProjector { cutoff_scale: n, shape, kind: ProjectorKind::High }
    }

    pub fn band(n: f64, shape: CutoffShape) -> Self {
        LPProjector { cutoff_scale: n, shape, kind: ProjectorKind::Band }
    }

    pub fn between(lower: f64, upper: f64, shape: CutoffShape) -> Self {
        LPProjector { cutoff_scale: upper, shape, kind: ProjectorKind::Between { lower } }
    }

    fn low_multiplier(shape: CutoffShape, n: f64, r: f64) -> f64 {
        match shape {
            CutoffShape::Sharp => {
                if r <= n {
                    1.0
                } else {
                    0.0
                }
            }
            CutoffShape::RaisedCosine => {
                if r <= n / 2.0 {
                    1.0
                } else if r >= n {
                    0.0
                } else {
                    let s = (2.0 * r / n).log2();
                    (std::f64::consts::FRAC_PI_2 * s).cos().powi(2)
                }
            }
        }
    }

    /// Multiplier value at frequency magnitude `r`.
    pub fn multiplier(&self, r: f64) -> f64 {
        let n = self.cutoff_scale;
        let low = |m: f64| Self::low_multiplier(self.shape, m, r);
        match self.kind {
            ProjectorKind::Low => low(n),
            ProjectorKind::High => 1.0 - low(n),
            ProjectorKind::Band => low(n) - low(n / 2.0),
            ProjectorKind::Between { lower } => low(n) - low(lower),
        }
    }
}

/// Multiplies the spectrum by the projector's cutoff.
pub fn project(field: &Field, projector: &LPProjector) -> Field {
    let g = field.grid;
    apply_multiplier(field, |i| Complex64::new(projector.multiplier(g.frequency_norm_sq(i).sqrt()), 0.0))
}

/// Dyadic Littlewood–Paley partition of unity on the grid's lattice: a low
/// piece at the smallest dyadic N ≤ π/L followed by bands up to twice the
/// largest lattice frequency. The multipliers sum to one at every node.
pub fn dyadic_partition(grid: &Grid, shape: CutoffShape) -> Vec<LPProjector> {
    let j_min = grid.dxi().log2().floor() as i32;
    let max_freq = (grid.dim() as f64).sqrt() * grid.nyquist();
    let j_max = (2.0 * max_freq).log2().ceil() as i32;
    let mut out = vec![LPProjector::low(2f64.powi(j_min), shape)];
    for j in j_min + 1..=j_max {
        out.push(LPProjector::band(2f64.powi(j), shape));
    }
    out
}

pub(crate) fn spectral_weights(field: &Field) -> Vec<f64> {
    let mut v = field.values.clone();
    dft(&field.grid, &mut v, false);
    let w = field.grid.cell_volume() / field.grid.len() as f64;
    v.iter().map(|z| z.norm_sqr() * w).collect()
}

fn marginal_median(coords: &[(f64, f64)]) -> f64 {
    // (coordinate, weight) pairs; ties go to the smaller coordinate
    let mut sorted = coords.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = sorted.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    for (c, w) in &sorted {
        acc += w;
        if acc >= total / 2.0 {
            return *c;
        }
    }
    sorted.last().map(|p| p.0).unwrap_or(0.0)
}

fn median_center<F: Fn(usize) -> [f64; 2]>(grid: &Grid, weights: &[f64], position: F) -> Vec<f64> {
    let n = grid.points_per_axis();
    (0..grid.dim())
        .map(|axis| {
            let mut per_node = vec![0.0; n];
            let mut coord = vec![0.0; n];
            for (i, &w) in weights.iter().enumerate() {
                let idx = grid.unravel(i)[axis];
                per_node[idx] += w;
                coord[idx] = position(i)[axis];
            }
            let pairs: Vec<(f64, f64)> = coord.into_iter().zip(per_node).collect();
            marginal_median(&pairs)
        })
        .collect()
}

/// Coordinate-wise mass medians of |u|² and of |û|².
pub fn centers(field: &Field) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = mass(field);
    if m < MASS_FLOOR {
        return Err(Error::VanishingMass { mass: m });
    }
    let g = field.grid;
    let phys: Vec<f64> = field.values.iter().map(|z| z.norm_sqr()).collect();
    let x = median_center(&g, &phys, |i| g.position(i));
    let xi = median_center(&g, &spectral_weights(field), |i| g.frequency(i));
    Ok((x, xi))
}

/// Smallest distance r such that the weight strictly beyond r is at most
/// `threshold`.
fn capture_radius(mut pairs: Vec<(f64, f64)>, threshold: f64) -> f64 {
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    if total <= threshold {
        return 0.0;
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut acc = 0.0;
    let mut i = 0;
    while i < pairs.len() {
        let r = pairs[i].0;
        while i < pairs.len() && pairs[i].0 == r {
            acc += pairs[i].1;
            i += 1;
        }
        if total - acc <= threshold {
            return r;
        }
    }
    pairs.last().map(|p| p.0).unwrap_or(0.0)
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
}

pub(crate) fn frequency_capture_radius(field: &Field, xi_center: &[f64], fraction: f64, total: f64) -> f64 {
    let g = field.grid;
    let d = g.dim();
    let pairs = spectral_weights(field)
        .into_iter()
        .enumerate()
        .map(|(i, w)| (distance(&g.frequency(i)[..d], xi_center), w))
        .collect();
    capture_radius(pairs, fraction * total)
}

pub(crate) fn spatial_capture_radius(field: &Field, x_center: &[f64], fraction: f64, total: f64) -> f64 {
    let g = field.grid;
    let d = g.dim();
    let h = g.cell_volume();
    let pairs = field
        .values
        .iter()
        .enumerate()
        .map(|(i, z)| (distance(&g.position(i)[..d], x_center), z.norm_sqr() * h))
        .collect();
    capture_radius(pairs, fraction * total)
}

/// Dyadic frequency scale N: the smallest power of two such that at most
/// `eta_ref`·M(f) of the mass lies at |ξ − ξ(f)| > N, clamped to
/// [π/L, Nyquist].
pub fn scale(field: &Field, eta_ref: f64) -> Result<f64> {
    if !(eta_ref > 0.0 && eta_ref < 1.0) {
        return Err(Error::InvalidArgument(format!("eta_ref {eta_ref} not in (0, 1)")));
    }
    let (_, xi_c) = centers(field)?;
    let m = mass(field);
    let r = frequency_capture_radius(field, &xi_c, eta_ref, m);
    let g = field.grid;
    let n = if r > 0.0 { 2f64.powi(r.log2().ceil() as i32) } else { 0.0 };
    Ok(n.clamp(g.dxi(), g.nyquist()))
}

/// [`scale`], or the lattice spacing π/L for (numerically) vanishing fields.
pub fn scale_or_floor(field: &Field, eta_ref: f64) -> f64 {
    if mass(field) < MASS_FLOOR {
        return field.grid.dxi();
    }
    scale(field, eta_ref).unwrap_or(field.grid.dxi())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaConstant {
    pub eta: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationTrack {
    pub times: Vec<f64>,
    pub x_center: Vec<Vec<f64>>,
    pub xi_center: Vec<Vec<f64>>,
    pub scale: Vec<f64>,
    /// Smallest C(η) for which both concentration estimates hold at every
    /// snapshot, with η measured as a fraction of the mass.
    pub c_eta_table: Vec<EtaConstant>,
}

impl ConcentrationTrack {
    pub fn is_monotone(&self) -> bool {
        let mut t = self.c_eta_table.clone();
        t.sort_by(|a, b| a.eta.total_cmp(&b.eta));
        t.windows(2).all(|w| w[1].c <= w[0].c)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("eta,C\n");
        for row in &self.c_eta_table {
            s.push_str(&format!("{},{}\n", row.eta, row.c));
        }
        s
    }
}

/// Tracks x(t), ξ(t), N(t) and tabulates C(η) for each requested η.
pub fn concentration_profile(traj: &Trajectory, etas: &[f64]) -> Result<ConcentrationTrack> {
    let eta_ref = traj.config.eta_ref;
    let mut track = ConcentrationTrack {
        times: traj.times.clone(),
        x_center: vec![],
        xi_center: vec![],
        scale: vec![],
        c_eta_table: etas.iter().map(|&eta| EtaConstant { eta, c: 0.0 }).collect(),
    };
    for u in &traj.fields {
        let (x, xi) = centers(u)?;
        let n = scale(u, eta_ref)?;
        let m = mass(u);
        for row in track.c_eta_table.iter_mut() {
            let cx = n * spatial_capture_radius(u, &x, row.eta, m);
            let cxi = frequency_capture_radius(u, &xi, row.eta, m) / n;
            row.c = row.c.max(cx).max(cxi);
        }
        track.x_center.push(x);
        track.xi_center.push(xi);
        track.scale.push(n);
    }
    Ok(track)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationOptions {
    pub low_factor: f64,
    pub high_factor: f64,
    pub shape: CutoffShape,
}

impl Default for LocalizationOptions {
    fn default() -> Self {
        LocalizationOptions { low_factor: 1.0 / 16.0, high_factor: 16.0, shape: CutoffShape::RaisedCosine }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyLocalization {
    pub n_loc: f64,
    /// ‖P_{≤cN} f‖₂
    pub low_mass: f64,
    /// ‖P_{≥CN} f‖₂
    pub high_mass: f64,
    /// ‖P_{cN<·<CN} f‖₂
    pub band_mass: f64,
    pub localized: bool,
}

pub fn frequency_localization_report(
    field: &Field,
    eta: f64,
    options: LocalizationOptions,
) -> Result<FrequencyLocalization> {
    let n_loc = scale(field, eta)?;
    let (lo, hi) = (options.low_factor * n_loc, options.high_factor * n_loc);
    let low_mass = l2_norm(&project(field, &LPProjector::low(lo, options.shape)));
    let high_mass = l2_norm(&project(field, &LPProjector::high(hi, options.shape)));
    let band_mass = l2_norm(&project(field, &LPProjector::between(lo, hi, options.shape)));
    let norm = l2_norm(field);
    let localized = low_mass <= eta * norm && high_mass <= eta * norm && band_mass >= norm / 2.0;
    Ok(FrequencyLocalization { n_loc, low_mass, high_mass, band_mass, localized })
}

/// Lattice nodes that together hold all but `leak` of the spectral mass.
fn spectral_support(field: &Field, leak: f64) -> Vec<usize> {
    let w = spectral_weights(field);
    let total: f64 = w.iter().sum();
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| w[a].total_cmp(&w[b]));
    let mut dropped = 0.0;
    let mut keep_from = 0;
    for (k, &i) in order.iter().enumerate() {
        if dropped + w[i] > leak * total {
            keep_from = k;
            break;
        }
        dropped += w[i];
        keep_from = k + 1;
    }
    order[keep_from..].to_vec()
}

/// Spectral mass fraction of `field` outside |ξ| ≤ radius.
fn leakage_outside(field: &Field, radius: f64) -> f64 {
    let g = field.grid;
    let w = spectral_weights(field);
    let total: f64 = w.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let out: f64 = w.iter().enumerate().filter(|(i, _)| g.frequency_norm_sq(*i).sqrt() > radius).map(|p| p.1).sum();
    out / total
}

/// Leakage tolerated by [`bilinear_ratio`] outside the declared supports.
pub const BILINEAR_LEAK_TOL: f64 = 1e-6;

/// ‖u₁u₂‖_{L^q_{t,x}} / (N^{d−(d+2)/q} ‖u₁‖_{S*} ‖u₂‖_{S*}) where
/// ‖u‖_{S*} = ‖u(t₀)‖₂ + ‖(i∂_t + Δ)u‖_{L^{2(d+2)/(d+4)}_{t,x}}.
pub fn bilinear_ratio(u1: &Trajectory, u2: &Trajectory, q: f64, n_scale: f64, freq_gap: f64) -> Result<f64> {
    let grid = u1.grid();
    grid.check_same(&u2.grid())?;
    let d = grid.dim() as f64;
    if q < (d + 3.0) / (d + 1.0) {
        return Err(Error::InvalidArgument(format!("exponent {q} below (d+3)/(d+1)")));
    }
    if u1.times != u2.times {
        return Err(Error::InvalidArgument("trajectories sampled at different times".into()));
    }
    if mass(&u1.fields[0]) == 0.0 || mass(&u2.fields[0]) == 0.0 {
        return Ok(0.0);
    }
    for traj in [u1, u2] {
        for f in [&traj.fields[0], traj.fields.last().unwrap()] {
            let leak = leakage_outside(f, n_scale);
            if leak > BILINEAR_LEAK_TOL {
                return Err(Error::InvalidArgument(format!(
                    "spectral leakage {leak:e} outside |xi| <= {n_scale}"
                )));
            }
        }
    }
    let s1 = spectral_support(&u1.fields[0], BILINEAR_LEAK_TOL);
    let s2 = spectral_support(&u2.fields[0], BILINEAR_LEAK_TOL);
    let dim = grid.dim();
    let mut gap = f64::INFINITY;
    for &a in &s1 {
        let fa = grid.frequency(a);
        for &b in &s2 {
            gap = gap.min(distance(&fa[..dim], &grid.frequency(b)[..dim]));
        }
    }
    if gap < freq_gap {
        return Err(Error::InsufficientSeparation { found: gap, required: freq_gap });
    }
    let products = u1
        .fields
        .iter()
        .zip(&u2.fields)
        .map(|(a, b)| a.zip(b, |x, y| x * y))
        .collect::<Result<Vec<_>>>()?;
    let prod = Trajectory::from_snapshots(u1.config.clone(), u1.times.clone(), products)?;
    let numerator = spacetime_lp_norm(&prod, q)?;
    let strichartz = |u: &Trajectory| -> Result<f64> { Ok(l2_norm(&u.fields[0]) + linear_defect_norm(u)?) };
    let denom = n_scale.powf(d - (d + 2.0) / q) * strichartz(u1)? * strichartz(u2)?;
    Ok(numerator / denom)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    #[serde(rename = "N")]
    pub n: f64,
    pub norm: f64,
    pub bound_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeRegularityReport {
    /// max_N ‖P_N u₀‖₂ / (A N^s); the hypothesis holds when ≤ 1.
    pub hypothesis_ratio: f64,
    pub hypothesis_holds: bool,
    /// max_N ‖P_N u‖_{L^{2(d+2)/d}_{t,x}} / (A N^s)
    pub worst_ratio: f64,
    pub per_n_table: Vec<EnvelopeRow>,
    pub diverged: bool,
}

impl NegativeRegularityReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("N,norm,bound_ratio\n");
        for r in &self.per_n_table {
            s.push_str(&format!("{},{},{}\n", r.n, r.norm, r.bound_ratio));
        }
        s
    }
}

/// Smallest A with ‖P_N u₀‖₂ ≤ A N^s for every dyadic N of the partition.
pub fn envelope_constant(u0: &Field, s: f64, shape: CutoffShape) -> f64 {
    dyadic_partition(&u0.grid, shape)
        .iter()
        .map(|p| l2_norm(&project(u0, p)) / p.cutoff_scale.powf(s))
        .fold(0.0, f64::max)
}

pub fn negative_regularity_check(
    u0: &Field,
    a: f64,
    s: f64,
    t_span: (f64, f64),
    config: &SolverConfig,
    shape: CutoffShape,
    exec: Exec,
) -> Result<NegativeRegularityReport> {
    if !(a > 0.0) {
        return Err(Error::InvalidArgument("envelope constant A must be positive".into()));
    }
    let partition = dyadic_partition(&u0.grid, shape);
    let hypothesis_ratio = partition
        .iter()
        .map(|p| l2_norm(&project(u0, p)) / (a * p.cutoff_scale.powf(s)))
        .fold(0.0, f64::max);
    let traj = evolve(u0, t_span, config)?;
    let d = u0.grid.dim() as f64;
    let p_exp = 2.0 * (d + 2.0) / d;
    let rows = exec
        .map(&partition, |proj| -> Result<EnvelopeRow> {
            let fields: Vec<Field> = traj.fields.iter().map(|f| project(f, proj)).collect();
            let pt = Trajectory::from_snapshots(traj.config.clone(), traj.times.clone(), fields)?;
            let norm = spacetime_lp_norm(&pt, p_exp)?;
            Ok(EnvelopeRow { n: proj.cutoff_scale, norm, bound_ratio: norm / (a * proj.cutoff_scale.powf(s)) })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let worst_ratio = rows.iter().map(|r| r.bound_ratio).fold(0.0, f64::max);
    Ok(NegativeRegularityReport {
        hypothesis_ratio,
        hypothesis_holds: hypothesis_ratio <= 1.0,
        worst_ratio,
        per_n_table: rows,
        diverged: traj.diverged,
    })
}

/// ‖ |∇|^{-1/4} G_ξ(u)(t) ‖ in L^{4d/(2d−1)}_x, with
/// G_ξ(u)(t, x) = e^{ix·ξ} e^{-it|ξ|²} u(t, x − 2tξ) and the zero mode of
/// |∇|^{-1/4} set to 0.
pub fn galilean_functional(field: &Field, xi: &[f64], time: f64) -> Result<f64> {
    let g = field.grid;
    let d = g.dim();
    if xi.len() != d {
        return Err(Error::InvalidArgument("frequency has the wrong dimension".into()));
    }
    let xi_sq: f64 = xi.iter().map(|v| v * v).sum();
    let boost = GroupElement {
        theta: -time * xi_sq,
        xi0: xi.to_vec(),
        x0: xi.iter().map(|v| 2.0 * time * v).collect(),
        lambda: 1.0,
    };
    let boosted = apply(&boost, field)?;
    let smoothed = apply_multiplier(&boosted, |i| {
        let r = g.frequency_norm_sq(i).sqrt();
        if r == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(r.powf(-0.25), 0.0)
        }
    });
    let p = 4.0 * d as f64 / (2.0 * d as f64 - 1.0);
    lp_norm(&smoothed, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{l2_distance, make_grid};

    fn bump(grid: Grid, x0: f64, xi0: f64, width: f64) -> Field {
        Field::from_fn(grid, |x| Complex64::from_polar((-(x[0] - x0).powi(2) / (2.0 * width * width)).exp(), xi0 * x[0]))
    }

    #[test]
    fn full_band_low_projection_is_identity() {
        let g = make_grid(1, 128, 8.0).unwrap();
        let f = bump(g, 0.3, 1.0, 0.7);
        let p = project(&f, &LPProjector::low(2.0 * g.nyquist(), CutoffShape::RaisedCosine));
        assert!(l2_distance(&p, &f).unwrap() < 1e-14);
    }

    #[test]
    fn sharp_low_and_high_partition() {
        let g = make_grid(2, 32, 4.0).unwrap();
        let f = Field::from_fn(g, |x| Complex64::new((-x[0] * x[0] - 2.0 * x[1] * x[1]).exp(), x[0].sin()));
        let lo = project(&f, &LPProjector::low(3.0, CutoffShape::Sharp));
        let hi = project(&f, &LPProjector::high(3.0, CutoffShape::Sharp));
        assert!(l2_distance(&lo.add(&hi).unwrap(), &f).unwrap() < 1e-12);
        let a = project(&project(&f, &LPProjector::low(5.0, CutoffShape::Sharp)), &LPProjector::low(2.0, CutoffShape::Sharp));
        let b = project(&f, &LPProjector::low(2.0, CutoffShape::Sharp));
        assert!(l2_distance(&a, &b).unwrap() < 1e-14);
    }

    #[test]
    fn dyadic_partition_sums_to_one() {
        for (d, n, l) in [(1, 256, 16.0), (2, 32, 4.0)] {
            let g = make_grid(d, n, l).unwrap();
            for shape in [CutoffShape::Sharp, CutoffShape::RaisedCosine] {
                let parts = dyadic_partition(&g, shape);
                for i in 0..g.len() {
                    let r = g.frequency_norm_sq(i).sqrt();
                    let s: f64 = parts.iter().map(|p| p.multiplier(r)).sum();
                    assert!((s - 1.0).abs() < 1e-12, "r = {r}: {s}");
                    for p in &parts {
                        let m = p.multiplier(r);
                        assert!((-1e-15..=1.0 + 1e-15).contains(&m));
                    }
                }
            }
        }
    }

    #[test]
    fn centers_of_shifted_bump() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let (x, xi) = centers(&bump(g, 0.0, 0.0, 1.0)).unwrap();
        assert!(x[0].abs() <= g.spacing() && xi[0].abs() <= g.dxi());
        let (x, xi) = centers(&bump(g, 2.5, 3.0, 1.0)).unwrap();
        assert!((x[0] - 2.5).abs() <= g.spacing());
        assert!((xi[0] - 3.0).abs() <= g.dxi());
        assert!(centers(&Field::zeros(g)).is_err());
    }

    #[test]
    fn capture_radius_edge_cases() {
        assert_eq!(capture_radius(vec![(1.0, 1.0), (2.0, 1.0)], 5.0), 0.0);
        assert_eq!(capture_radius(vec![(1.0, 1.0), (2.0, 1.0), (3.0, 0.1)], 0.5), 2.0);
        assert_eq!(capture_radius(vec![(1.0, 1.0), (1.0, 1.0)], 0.5), 1.0);
    }

    #[test]
    fn scale_is_dyadic_and_clamped() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let n = scale(&bump(g, 0.0, 0.0, 1.0), 0.1).unwrap();
        assert_eq!(n.log2().fract(), 0.0);
        assert!(scale(&bump(g, 0.0, 0.0, 1.0), 1.5).is_err());
        assert_eq!(scale_or_floor(&Field::zeros(g), 0.1), g.dxi());
    }

    #[test]
    fn windowed_mode_lives_in_the_band() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let xi = 10.0 * g.dxi();
        let f = Field::from_fn(g, |x| Complex64::from_polar((-x[0] * x[0] / 8.0).exp(), xi * x[0]));
        let r = frequency_localization_report(&f, 0.1, LocalizationOptions::default()).unwrap();
        assert!(r.band_mass / l2_norm(&f) > 0.99, "{r:?}");
    }

    #[test]
    fn galilean_functional_zero_and_constant() {
        let g = make_grid(1, 128, 8.0).unwrap();
        assert_eq!(galilean_functional(&Field::zeros(g), &[0.3], 0.0).unwrap(), 0.0);
        let c = Field::from_fn(g, |_| Complex64::new(2.0, -1.0));
        assert!(galilean_functional(&c, &[0.0], 0.0).unwrap() < 1e-12);
    }

    #[test]
    fn bilinear_ratio_zero_partner() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let times: Vec<f64> = (0..=10).map(|k| k as f64 * 0.1).collect();
        let a = crate::propagator::free_trajectory(&bump(g, 0.0, 2.0, 1.0), &times).unwrap();
        let z = crate::propagator::free_trajectory(&Field::zeros(g), &times).unwrap();
        assert_eq!(bilinear_ratio(&a, &z, 2.0, 8.0, 1.0).unwrap(), 0.0);
        assert!(bilinear_ratio(&a, &z, 1.5, 8.0, 1.0).is_err());
    }
}
