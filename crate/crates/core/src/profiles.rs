//! Constructive profile decomposition: greedy extraction of bubbles
//! g′φ with g′ ∈ G′ (or G′_rad), decoupling and orthogonality reports.
//!
//! Each extraction searches a coarse (template, λ, t₀) lattice, scoring
//! every translation and a coarse set of modulations at once through FFT
//! cross-correlation, then refines the winner by pattern search. The
//! profile is φ = A g′^{-1}r with A = P W P a product of smooth windows in
//! frequency (P) and space (W) around the template's unit frame. Since
//! 0 ≤ A ≤ 1, M(φ) + M(r − g′φ) ≤ M(r) at every step.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{frequency_capture_radius, spatial_capture_radius};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::grid::{apply_multiplier, boundary_fraction, dft, inner, l2_norm, mass, Field, Grid};
use crate::groundstate::petviashvili_solve;
use crate::propagator::{free_propagate, free_scattering_sizes};
use crate::symmetry::{apply, apply_enlarged, inverse, EnlargedElement, GroupElement};

/// Largest tolerated relative asymmetry of radial input.
pub const RADIAL_TOL: f64 = 1e-6;

/// A unit-mass bubble shape centred at the origin of its own frame.
#[derive(Debug, Clone)]
pub struct Template {
    pub name: String,
    pub field: Field,
    window_x: f64,
    window_xi: f64,
}

impl Template {
    pub fn new(name: impl Into<String>, field: &Field) -> Result<Self> {
        let m = mass(field);
        if m == 0.0 {
            return Err(Error::VanishingMass { mass: m });
        }
        let f = field.scale(Complex64::new(m.sqrt().recip(), 0.0));
        let d = f.grid.dim();
        let origin = vec![0.0; d];
        let g = f.grid;
        let window_x = spatial_capture_radius(&f, &origin, 1e-8, 1.0).max(4.0 * g.spacing());
        let window_xi = frequency_capture_radius(&f, &origin, 1e-8, 1.0).max(4.0 * g.dxi());
        Ok(Template { name: name.into(), field: f, window_x, window_xi })
    }

    /// e^{-|x|²/2}
    pub fn gaussian(grid: Grid) -> Self {
        let f = Field::from_real_fn(grid, |x| (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp());
        Self::new("gaussian", &f).expect("nonzero")
    }
}

#[derive(Debug, Clone)]
pub struct ProfileOptions {
    pub max_profiles: usize,
    /// Absolute stopping mass; `None` means 1e-3·M(u).
    pub mass_floor: Option<f64>,
    /// Half-width of the t₀ search window and of the free-evolution window
    /// used for scattering sizes.
    pub t_ref: f64,
    pub t0_step: f64,
    /// Dyadic range of λ in the coarse search, as exponents of 2.
    pub log2_lambda: (i32, i32),
    /// Sample count of the free-evolution window.
    pub window_nodes: usize,
    pub templates: Vec<Template>,
    pub exec: Exec,
}

impl ProfileOptions {
    /// Gaussian template only.
    pub fn new(grid: Grid) -> Self {
        ProfileOptions {
            max_profiles: 8,
            mass_floor: None,
            t_ref: 4.0,
            t0_step: 0.5,
            log2_lambda: (-4, 4),
            window_nodes: 401,
            templates: vec![Template::gaussian(grid)],
            exec: Exec::default(),
        }
    }

    /// Gaussian and ground-state templates, solving for Q on the grid.
    pub fn with_ground_state(grid: Grid) -> Result<Self> {
        let q = petviashvili_solve(grid, 1e-10, 2000)?;
        let mut o = Self::new(grid);
        o.templates.push(Template::new("Q", &q.field)?);
        Ok(o)
    }

    pub fn window_times(&self) -> Vec<f64> {
        reference_times(self.t_ref, self.window_nodes)
    }
}

/// `nodes` equally spaced times on [−t_ref, t_ref].
pub fn reference_times(t_ref: f64, nodes: usize) -> Vec<f64> {
    let nodes = nodes.max(2);
    (0..nodes).map(|k| -t_ref + 2.0 * t_ref * k as f64 / (nodes - 1) as f64).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Profile {
    #[serde(skip)]
    pub phi: Option<Field>,
    pub fit: EnlargedElement,
    pub captured_mass: f64,
    pub template: String,
    /// Orbit distance between φ and the template rescaled to ‖φ‖₂.
    pub template_distance: f64,
}

impl Profile {
    pub fn phi(&self) -> &Field {
        self.phi.as_ref().expect("profile field present")
    }

    /// g′φ, the bubble in the frame of the input.
    pub fn bubble(&self) -> Result<Field> {
        apply_enlarged(&self.fit, self.phi())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileDecomposition {
    pub profiles: Vec<Profile>,
    #[serde(skip)]
    pub remainder: Option<Field>,
    pub input_mass: f64,
    pub remainder_mass: f64,
    /// |M(u) − ΣM(φ) − M(w)|
    pub decoupling_defect: f64,
    /// S of the free evolution of the remainder over the reference window.
    pub remainder_linear_s: f64,
}

impl ProfileDecomposition {
    pub fn remainder(&self) -> &Field {
        self.remainder.as_ref().expect("remainder present")
    }

    pub fn captured_masses(&self) -> Vec<f64> {
        self.profiles.iter().map(|p| p.captured_mass).collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    score: f64,
    template: usize,
    log2_lambda: f64,
    t0: f64,
    x0: [f64; 2],
    xi0: [f64; 2],
}

impl Candidate {
    /// Strictly preferred over `other`: larger score, then smallest |t₀|,
    /// smallest |log₂ λ|, lexicographic (x₀, ξ₀).
    fn beats(&self, other: &Candidate) -> bool {
        let tol = 1e-12 * self.score.abs().max(other.score.abs());
        if (self.score - other.score).abs() > tol {
            return self.score > other.score;
        }
        let key = |c: &Candidate| [c.t0.abs(), c.log2_lambda.abs(), c.x0[0], c.x0[1], c.xi0[0], c.xi0[1]];
        let (a, b) = (key(self), key(other));
        for (p, q) in a.iter().zip(&b) {
            if p != q {
                return p < q;
            }
        }
        false
    }

    fn element(&self, dim: usize, theta: f64) -> EnlargedElement {
        EnlargedElement {
            base: GroupElement {
                theta,
                xi0: self.xi0[..dim].to_vec(),
                x0: self.x0[..dim].to_vec(),
                lambda: 2f64.powf(self.log2_lambda),
            },
            t0: self.t0,
        }
    }
}

fn pick_best(cands: impl IntoIterator<Item = Option<Candidate>>) -> Option<Candidate> {
    let mut best: Option<Candidate> = None;
    for c in cands.into_iter().flatten() {
        if best.as_ref().map_or(true, |b| c.beats(b)) {
            best = Some(c);
        }
    }
    best
}

fn spectrum(f: &Field) -> Vec<Complex64> {
    let mut v = f.values.clone();
    dft(&f.grid, &mut v, false);
    v
}

/// Template dilated by λ and freely evolved by t₀, or `None` when it does
/// not fit in the box.
fn dressed_template(t: &Template, log2_lambda: f64, t0: f64) -> Option<Field> {
    let dim = t.field.grid.dim();
    let b = apply(&GroupElement::dilation(2f64.powf(log2_lambda), dim), &free_propagate(&t.field, t0)).ok()?;
    if b.diverged || boundary_fraction(&b) > 1e-3 {
        return None;
    }
    Some(b)
}

/// Cyclic cross-correlation c(m) = Σ_j h_j conj(b_{j−m}) h^d, given the
/// spectra of h and b.
fn correlate(grid: &Grid, h_hat: &[Complex64], b_hat: &[Complex64]) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = h_hat.iter().zip(b_hat).map(|(a, b)| a * b.conj()).collect();
    dft(grid, &mut c, true);
    let w = grid.cell_volume() / grid.len() as f64;
    c.iter_mut().for_each(|z| *z *= w);
    c
}

fn lattice_offset(grid: &Grid, i: usize) -> [f64; 2] {
    let [a, b] = grid.unravel(i);
    let h = grid.spacing();
    let s = |j: usize| grid.signed_index(j) as f64 * h;
    if grid.dim() == 1 {
        [s(a), 0.0]
    } else {
        [s(a), s(b)]
    }
}

/// Lattice modulations worth scoring: the active part of r̂ rounded to a
/// stride matched to the dressed template's spectral width.
fn modulation_candidates(grid: &Grid, r_hat: &[Complex64], b_hat: &[Complex64]) -> Vec<[i64; 2]> {
    let d = grid.dim();
    let total: f64 = b_hat.iter().map(|z| z.norm_sqr()).sum();
    let spread: f64 = b_hat
        .iter()
        .enumerate()
        .map(|(i, z)| z.norm_sqr() * grid.frequency_norm_sq(i))
        .sum::<f64>()
        / total
        / d as f64;
    let stride = ((spread.sqrt() / grid.dxi()) / 2.0).floor().max(1.0) as i64;
    let peak = r_hat.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let mut out: Vec<[i64; 2]> = Vec::new();
    for (i, z) in r_hat.iter().enumerate() {
        if z.norm_sqr() < 1e-6 * peak {
            continue;
        }
        let [a, b] = grid.unravel(i);
        let round = |k: i64| (k as f64 / stride as f64).round() as i64 * stride;
        let k = [round(grid.signed_index(a)), if d == 2 { round(grid.signed_index(b)) } else { 0 }];
        out.push(k);
    }
    out.sort();
    out.dedup();
    out
}

/// Spectrum of r e^{-ix·ξ_k} for the lattice modulation k.
fn shifted_spectrum(grid: &Grid, r_hat: &[Complex64], k: [i64; 2]) -> Vec<Complex64> {
    let n = grid.points_per_axis() as i64;
    let d = grid.dim();
    let sign = if (k[0] + k[1]).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    (0..grid.len())
        .map(|i| {
            let [a, b] = grid.unravel(i);
            let a2 = (a as i64 + k[0]).rem_euclid(n) as usize;
            let j = if d == 1 { a2 } else { a2 * n as usize + (b as i64 + k[1]).rem_euclid(n) as usize };
            r_hat[j] * sign
        })
        .collect()
}

/// Best coarse candidate of each template.
fn coarse_search(r: &Field, opts: &ProfileOptions, radial: bool) -> Vec<Candidate> {
    let grid = r.grid;
    let steps = (opts.t_ref / opts.t0_step).round() as i64;
    let mut combos = Vec::new();
    for ti in 0..opts.templates.len() {
        for j in opts.log2_lambda.0..=opts.log2_lambda.1 {
            for s in -steps..=steps {
                combos.push((ti, j as f64, s as f64 * opts.t0_step));
            }
        }
    }
    let r_hat = spectrum(r);
    let results = opts.exec.map(&combos, |&(ti, lj, t0)| {
        let b = dressed_template(&opts.templates[ti], lj, t0)?;
        let base = Candidate { score: 0.0, template: ti, log2_lambda: lj, t0, x0: [0.0; 2], xi0: [0.0; 2] };
        if radial {
            let score = inner(r, &b).ok()?.norm();
            return Some(Candidate { score, ..base });
        }
        let b_hat = spectrum(&b);
        let mut best: Option<Candidate> = None;
        for k in modulation_candidates(&grid, &r_hat, &b_hat) {
            let corr = correlate(&grid, &shifted_spectrum(&grid, &r_hat, k), &b_hat);
            let xi0 = [k[0] as f64 * grid.dxi(), k[1] as f64 * grid.dxi()];
            let mut local: Option<Candidate> = None;
            for (i, z) in corr.iter().enumerate() {
                let c = Candidate { score: z.norm(), x0: lattice_offset(&grid, i), xi0, ..base };
                if local.as_ref().map_or(true, |l| c.beats(l)) {
                    local = Some(c);
                }
            }
            if let Some(c) = local {
                if best.as_ref().map_or(true, |b| c.beats(b)) {
                    best = Some(c);
                }
            }
        }
        best
    });
    (0..opts.templates.len())
        .filter_map(|ti| pick_best(results.iter().map(|c| c.filter(|c| c.template == ti))))
        .collect()
}

fn score_of(r: &Field, t: &Template, c: &Candidate) -> Option<f64> {
    let dim = r.grid.dim();
    let b = apply_enlarged(&c.element(dim, 0.0), &t.field).ok()?;
    if b.diverged {
        return None;
    }
    Some(inner(r, &b).ok()?.norm())
}

/// Pattern search over (log₂ λ, t₀, x₀, ξ₀) from the coarse winner.
fn refine(r: &Field, opts: &ProfileOptions, start: Candidate, radial: bool) -> Candidate {
    let grid = r.grid;
    let d = grid.dim();
    let t = &opts.templates[start.template];
    let lambda = 2f64.powf(start.log2_lambda);
    // coordinates: 0 log₂λ, 1 t₀, 2.. x₀, then ξ₀
    let ncoord = if radial { 2 } else { 2 + 2 * d };
    let mut step = vec![0.25, opts.t0_step / 2.0];
    if !radial {
        step.extend(std::iter::repeat(grid.spacing().max(0.25 * lambda)).take(d));
        step.extend(std::iter::repeat(grid.dxi().max(0.25 / lambda)).take(d));
    }
    let get = |c: &Candidate, k: usize| match k {
        0 => c.log2_lambda,
        1 => c.t0,
        k if k < 2 + d => c.x0[k - 2],
        k => c.xi0[k - 2 - d],
    };
    let set = |c: &mut Candidate, k: usize, v: f64| match k {
        0 => c.log2_lambda = v,
        1 => c.t0 = v,
        k if k < 2 + d => c.x0[k - 2] = v,
        k => c.xi0[k - 2 - d] = v,
    };
    let lo = opts.log2_lambda.0 as f64 - 0.5;
    let hi = opts.log2_lambda.1 as f64 + 0.5;
    let tmax = opts.t_ref + opts.t0_step;
    let mut best = start;
    match score_of(r, t, &best) {
        Some(s) => best.score = s,
        None => return start,
    }
    let mut evals = 0;
    while evals < 600 {
        let mut improved = false;
        for k in 0..ncoord {
            for dir in [1.0, -1.0] {
                let mut c = best;
                let v = get(&c, k) + dir * step[k];
                if (k == 0 && !(lo..=hi).contains(&v)) || (k == 1 && v.abs() > tmax) {
                    continue;
                }
                set(&mut c, k, v);
                evals += 1;
                if let Some(s) = score_of(r, t, &c) {
                    if s > best.score * (1.0 + 1e-13) {
                        c.score = s;
                        best = c;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step.iter_mut().for_each(|s| *s /= 2.0);
            if step[0] < 1e-7 && step[1] < 1e-7 && step.iter().skip(2).all(|&s| s < 1e-7) {
                break;
            }
        }
    }
    best
}

fn taper(r: f64, inner_radius: f64, outer_radius: f64) -> f64 {
    if r <= inner_radius {
        1.0
    } else if r >= outer_radius {
        0.0
    } else {
        let s = (r - inner_radius) / (outer_radius - inner_radius);
        (std::f64::consts::FRAC_PI_2 * s).cos().powi(2)
    }
}

/// A v = P W P v with smooth radial windows about the origin.
fn window(v: &Field, t: &Template) -> Field {
    let g = v.grid;
    let d = g.dim();
    let p = |f: &Field| {
        apply_multiplier(f, |i| Complex64::new(taper(g.frequency_norm_sq(i).sqrt(), t.window_xi, 1.5 * t.window_xi), 0.0))
    };
    let mut w = p(v);
    for (i, z) in w.values.iter_mut().enumerate() {
        let x = g.position(i);
        let r = x[..d].iter().map(|c| c * c).sum::<f64>().sqrt();
        *z *= taper(r, t.window_x, 1.5 * t.window_x);
    }
    p(&w)
}

fn inverse_enlarged(g: &EnlargedElement, f: &Field) -> Result<Field> {
    Ok(free_propagate(&apply(&inverse(&g.base), f)?, -g.t0))
}

/// min over phases and lattice translations of ‖a − e^{iθ}b(· − y)‖₂.
pub fn orbit_distance(a: &Field, b: &Field) -> Result<f64> {
    a.grid.check_same(&b.grid)?;
    let corr = correlate(&a.grid, &spectrum(a), &spectrum(b));
    let peak = corr.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok((mass(a) + mass(b) - 2.0 * peak).max(0.0).sqrt())
}

fn linear_s(f: &Field, times: &[f64]) -> Result<f64> {
    Ok(free_scattering_sizes(std::slice::from_ref(f), times)?[0])
}

fn extract(u: &Field, opts: &ProfileOptions, radial: bool) -> Result<ProfileDecomposition> {
    let grid = u.grid;
    let d = grid.dim();
    for t in &opts.templates {
        grid.check_same(&t.field.grid)?;
    }
    let m_u = mass(u);
    let floor = opts.mass_floor.unwrap_or(1e-3 * m_u);
    let mut r = u.clone();
    let mut profiles = Vec::new();

    while profiles.len() < opts.max_profiles && mass(&r) > floor && mass(&r) > 0.0 {
        let refined = coarse_search(&r, opts, radial).into_iter().map(|c| Some(refine(&r, opts, c, radial)));
        let Some(best) = pick_best(refined) else { break };
        let t = &opts.templates[best.template];
        let b = apply_enlarged(&best.element(d, 0.0), &t.field)?;
        let theta = inner(&r, &b)?.arg();
        let fit = best.element(d, theta);
        let fit = EnlargedElement { base: GroupElement::new(theta, fit.base.xi0, fit.base.x0, fit.base.lambda)?, t0: fit.t0 };
        let phi = window(&inverse_enlarged(&fit, &r)?, t);
        let captured = mass(&phi);
        if captured < floor {
            break;
        }
        let next = r.sub(&apply_enlarged(&fit, &phi)?)?;
        if !(mass(&next) < mass(&r)) {
            break;
        }
        let template_distance = orbit_distance(&phi, &t.field.scale(Complex64::new(captured.sqrt(), 0.0)))?;
        profiles.push(Profile {
            phi: Some(phi),
            fit,
            captured_mass: captured,
            template: t.name.clone(),
            template_distance,
        });
        r = next;
    }

    profiles.sort_by(|a, b| b.captured_mass.total_cmp(&a.captured_mass));
    let captured: f64 = profiles.iter().map(|p| p.captured_mass).sum();
    let remainder_mass = mass(&r);
    let remainder_linear_s = linear_s(&r, &opts.window_times())?;
    Ok(ProfileDecomposition {
        profiles,
        remainder: Some(r),
        input_mass: m_u,
        remainder_mass,
        decoupling_defect: (m_u - captured - remainder_mass).abs(),
        remainder_linear_s,
    })
}

/// Greedy decomposition with Gaussian and Q templates.
pub fn extract_profiles(u: &Field, max_profiles: usize, mass_floor: Option<f64>) -> Result<ProfileDecomposition> {
    let mut opts = ProfileOptions::with_ground_state(u.grid)?;
    opts.max_profiles = max_profiles;
    opts.mass_floor = mass_floor;
    extract_profiles_with(u, &opts)
}

pub fn extract_profiles_with(u: &Field, opts: &ProfileOptions) -> Result<ProfileDecomposition> {
    extract(u, opts, false)
}

/// Greedy decomposition over G′_rad (x₀ = ξ₀ = 0) of radial input.
pub fn extract_profiles_radial(u: &Field, max_profiles: usize, mass_floor: Option<f64>) -> Result<ProfileDecomposition> {
    let mut opts = ProfileOptions::with_ground_state(u.grid)?;
    opts.max_profiles = max_profiles;
    opts.mass_floor = mass_floor;
    extract_profiles_radial_with(u, &opts)
}

pub fn extract_profiles_radial_with(u: &Field, opts: &ProfileOptions) -> Result<ProfileDecomposition> {
    let asym = radial_asymmetry(u);
    if asym > RADIAL_TOL {
        return Err(Error::NotRadial(asym));
    }
    extract(u, opts, true)
}

/// Orthogonal projection onto radial functions: the even part in d = 1,
/// the rotation average in d = 2. The d = 2 average is taken of the
/// band-limited interpolant of the field zero-padded to a box of twice the
/// width, so circles leaving the box see zero rather than periodic images.
pub fn radial_projection(field: &Field) -> Field {
    let g = field.grid;
    if g.dim() == 1 {
        return field.zip(&field.reflect(), |a, b| (a + b) / 2.0).expect("same grid");
    }
    let n = g.points_per_axis();
    let half = (n / 2) as i64;
    let big = Grid::new(2, 2 * n, 2.0 * g.half_width()).expect("doubled grid");
    let mut padded = vec![Complex64::new(0.0, 0.0); big.len()];
    for (i, z) in field.values.iter().enumerate() {
        let [a, b] = g.unravel(i);
        padded[(a + n / 2) * 2 * n + b + n / 2] = *z;
    }
    dft(&big, &mut padded, false);
    // group the spectrum by |m|² with the corner phase e^{iξ·(L, L)} folded in
    let mut by_radius: std::collections::BTreeMap<i64, Complex64> = Default::default();
    for (i, z) in padded.iter().enumerate() {
        let [a, b] = big.unravel(i);
        let (ma, mb) = (big.signed_index(a), big.signed_index(b));
        let sign = if (ma + mb).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        *by_radius.entry(ma * ma + mb * mb).or_default() += z * sign;
    }
    let spectral: Vec<(f64, Complex64)> =
        by_radius.into_iter().map(|(k, z)| ((k as f64).sqrt() * big.dxi(), z)).collect();
    let mut x_keys: Vec<i64> = (0..g.len())
        .map(|i| {
            let [a, b] = g.unravel(i);
            let (p, q) = (a as i64 - half, b as i64 - half);
            p * p + q * q
        })
        .collect();
    x_keys.sort();
    x_keys.dedup();
    let inv_n = 1.0 / big.len() as f64;
    let values: Vec<Complex64> = Exec::default().map(&x_keys, |&k| {
        let r = (k as f64).sqrt() * g.spacing();
        spectral.iter().map(|(rho, z)| z * libm::j0(rho * r)).sum::<Complex64>() * inv_n
    });
    let lookup: std::collections::HashMap<i64, Complex64> = x_keys.into_iter().zip(values).collect();
    let mut out = Field::zeros(g);
    for (i, z) in out.values.iter_mut().enumerate() {
        let [a, b] = g.unravel(i);
        let (p, q) = (a as i64 - half, b as i64 - half);
        *z = lookup[&(p * p + q * q)];
    }
    out.label = field.label.clone();
    out
}

/// ‖f − P_rad f‖₂ / ‖f‖₂ (0 for the zero field).
pub fn radial_asymmetry(field: &Field) -> f64 {
    let n = l2_norm(field);
    if n == 0.0 {
        return 0.0;
    }
    crate::grid::l2_distance(field, &radial_projection(field)).expect("same grid") / n
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecouplingReport {
    /// |M(u) − ΣM(φ) − M(w)| / M(u)
    pub mass_gap: f64,
    /// |S(Σ bubbles) − Σ S(bubble)| / Σ S(bubble), over the window.
    pub s_gap: f64,
    /// Set when the mass gap shows the decomposition belongs to other data.
    pub mismatched: bool,
}

/// Mass gap above which a decomposition is flagged as not describing `u`.
pub const MISMATCH_GAP: f64 = 0.05;

/// |S(Σ fⱼ) − Σ S(fⱼ)| / Σ S(fⱼ) for the free evolutions over `times`.
pub fn scattering_gap(bubbles: &[Field], times: &[f64]) -> Result<f64> {
    if bubbles.is_empty() {
        return Ok(0.0);
    }
    let sizes = free_scattering_sizes(bubbles, times)?;
    let (whole, parts) = sizes.split_last().expect("nonempty");
    let separate: f64 = parts.iter().sum();
    if separate == 0.0 {
        return Ok(0.0);
    }
    Ok((whole - separate).abs() / separate)
}

pub fn decoupling_check(decomposition: &ProfileDecomposition, u: &Field, times: &[f64]) -> Result<DecouplingReport> {
    let m_u = mass(u);
    let captured: f64 = decomposition.captured_masses().iter().sum();
    let rem = decomposition.remainder.as_ref().map_or(decomposition.remainder_mass, mass);
    let mass_gap = if m_u > 0.0 { (m_u - captured - rem).abs() / m_u } else { 0.0 };
    let bubbles = decomposition.profiles.iter().map(|p| p.bubble()).collect::<Result<Vec<_>>>()?;
    let s_gap = scattering_gap(&bubbles, times)?;
    Ok(DecouplingReport { mass_gap, s_gap, mismatched: mass_gap > MISMATCH_GAP })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub pairwise: Vec<Vec<f64>>,
    pub min_offdiag: Option<f64>,
    /// Two fits coincide, which points at a doubled extraction.
    pub suspect: bool,
}

pub fn orthogonality_report(decomposition: &ProfileDecomposition) -> SeparationReport {
    let fits: Vec<EnlargedElement> = decomposition.profiles.iter().map(|p| p.fit.clone()).collect();
    separation_report(&fits)
}

/// Pairwise separation matrix of a list of fits; empty below two fits.
pub fn separation_report(fits: &[EnlargedElement]) -> SeparationReport {
    if fits.len() < 2 {
        return SeparationReport { pairwise: vec![], min_offdiag: None, suspect: false };
    }
    let k = fits.len();
    let mut pairwise = vec![vec![0.0; k]; k];
    let mut min_off = f64::INFINITY;
    for a in 0..k {
        for b in 0..k {
            pairwise[a][b] = crate::symmetry::separation(&fits[a], &fits[b]);
            if a != b {
                min_off = min_off.min(pairwise[a][b]);
            }
        }
    }
    SeparationReport { pairwise, min_offdiag: Some(min_off), suspect: min_off <= 2.0 + 1e-9 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn zero_field_has_empty_decomposition() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let opts = ProfileOptions::new(g);
        let dec = extract_profiles_with(&Field::zeros(g), &opts).unwrap();
        assert!(dec.profiles.is_empty());
        assert_eq!(dec.remainder_mass, 0.0);
    }

    #[test]
    fn tie_break_prefers_small_time_then_scale() {
        let a = Candidate { score: 1.0, template: 0, log2_lambda: 1.0, t0: 0.5, x0: [0.0; 2], xi0: [0.0; 2] };
        let b = Candidate { t0: -0.5, ..a };
        let c = Candidate { t0: 0.0, log2_lambda: -2.0, ..a };
        let d = Candidate { t0: 0.0, log2_lambda: 1.0, ..a };
        assert!(c.beats(&a) && c.beats(&b));
        assert!(d.beats(&c));
        assert!(!a.beats(&b) && b.beats(&a) == (b.x0 < a.x0));
    }

    #[test]
    fn windows_contract() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let t = Template::gaussian(g);
        let f = Field::from_fn(g, |x| Complex64::new(x[0].sin(), (0.3 * x[0]).cos()));
        let w = window(&f, &t);
        assert!(mass(&w) <= mass(&f));
        // A ≥ 0 and A ≤ 1: ‖Af‖² ≤ ⟨Af, f⟩
        let af = inner(&w, &f).unwrap();
        assert!(af.im.abs() < 1e-9 * mass(&f) && mass(&w) <= af.re * (1.0 + 1e-12));
    }

    #[test]
    fn even_part_in_one_dimension() {
        let g = make_grid(1, 128, 8.0).unwrap();
        let f = Field::from_real_fn(g, |x| (-(x[0] - 1.0).powi(2)).exp());
        let p = radial_projection(&f);
        assert!(radial_asymmetry(&p) < 1e-14);
        assert!(radial_asymmetry(&f) > 0.1);
    }

    #[test]
    fn orbit_distance_ignores_phase_and_shift() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let f = Field::from_real_fn(g, |x| (-x[0] * x[0]).exp());
        let h = f.roll([7, 0]).scale(Complex64::from_polar(1.0, 1.1));
        assert!(orbit_distance(&f, &h).unwrap() < 1e-6);
        assert!(orbit_distance(&f, &Field::zeros(g)).unwrap() - l2_norm(&f) < 1e-12);
    }
}
