//! The acceptance criteria as runnable checks. Each criterion returns a
//! [`CriterionResult`] with its measured value, threshold and runtime; the
//! acceptance test target and `mcnls verify` both print these.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{centers, concentration_profile, envelope_constant, negative_regularity_check, scale, CutoffShape};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::grid::{inner, l2_distance, l2_norm, make_grid, mass, Field, Grid};
use crate::groundstate::{exact_soliton, petviashvili_solve, GroundState};
use crate::propagator::{
    duhamel_residual, evolve, free_propagate, pseudoconformal, scattering_size, Nonlinearity, SolverConfig, Trajectory,
};
use crate::profiles::{extract_profiles_with, orbit_distance, scattering_gap, ProfileOptions};
use crate::symmetry::{apply, apply_enlarged, apply_trajectory, compose, inverse, separation, EnlargedElement, GroupElement};

/// Points per axis below which the pinned one-dimensional tolerances are
/// out of reach.
pub const MIN_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Points per axis of the one-dimensional soliton grid (L = 16).
    pub points: usize,
    pub exec: Exec,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 20240611, points: 512, exec: Exec::default() }
    }
}

impl VerifyOptions {
    pub fn validate(&self) -> Result<()> {
        if self.points < MIN_POINTS || !self.points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "{} points per axis; need a power of two of at least {MIN_POINTS}",
                self.points
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
    pub runtime_s: f64,
    pub runtime_limit_s: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<34} measured={:<12.4e} threshold={:<10.3e} {} ({:.2}s of {:.0}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.threshold,
            self.detail,
            self.runtime_s,
            self.runtime_limit_s
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub results: Vec<CriterionResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> Vec<u32> {
        self.results.iter().filter(|r| !r.passed).map(|r| r.id).collect()
    }

    /// JSON of everything except wall-clock times.
    pub fn canonical_json(&self) -> String {
        let mut r = self.clone();
        for c in &mut r.results {
            c.runtime_s = 0.0;
        }
        serde_json::to_string(&r).expect("serializable")
    }
}

pub const CRITERIA: [(u32, &str); 13] = [
    (1, "ground-state mass, d=1"),
    (2, "soliton fidelity"),
    (3, "free-evolution oracle"),
    (4, "group axioms and unitarity"),
    (5, "action covariance"),
    (6, "pseudoconformal involution"),
    (7, "Duhamel residual convergence"),
    (8, "profile recovery"),
    (9, "decoupling trends"),
    (10, "small-data scattering power law"),
    (11, "negative-regularity envelope"),
    (12, "concentration covariance"),
    (13, "determinism"),
];

const LIMITS: [f64; 13] = [5.0, 60.0, 5.0, 10.0, 120.0, 60.0, 600.0, 300.0, 300.0, 300.0, 600.0, 60.0, 600.0];

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

fn timed(id: u32, f: impl FnOnce() -> Result<Outcome>) -> CriterionResult {
    let start = Instant::now();
    let outcome = f();
    let runtime_s = start.elapsed().as_secs_f64();
    let idx = (id - 1) as usize;
    let runtime_limit_s = LIMITS[idx];
    let name = CRITERIA[idx].1.to_string();
    match outcome {
        Ok(o) => CriterionResult {
            id,
            name,
            passed: o.passed && runtime_s < runtime_limit_s,
            measured: o.measured,
            threshold: o.threshold,
            detail: o.detail,
            runtime_s,
            runtime_limit_s,
        },
        Err(e) => CriterionResult {
            id,
            name,
            passed: false,
            measured: f64::NAN,
            threshold: f64::NAN,
            detail: format!("error: {e}"),
            runtime_s,
            runtime_limit_s,
        },
    }
}

fn soliton_grid(opts: &VerifyOptions) -> Result<Grid> {
    make_grid(1, opts.points, 16.0)
}

fn ground_state(grid: Grid) -> Result<GroundState> {
    petviashvili_solve(grid, 1e-11, 2000)
}

pub fn run_criterion(id: u32, opts: &VerifyOptions) -> Result<CriterionResult> {
    opts.validate()?;
    let o = *opts;
    Ok(match id {
        1 => timed(1, || ground_state_mass(&o)),
        2 => timed(2, || soliton_fidelity(&o, Nonlinearity::Focusing)),
        3 => timed(3, free_oracle),
        4 => timed(4, || group_axioms(&o)),
        5 => timed(5, covariance),
        6 => timed(6, pseudoconformal_involution),
        7 => timed(7, || duhamel_convergence(&o)),
        8 => timed(8, || profile_recovery(&o)),
        9 => timed(9, || decoupling_trends(&o)),
        10 => timed(10, || small_data_power_law(&o)),
        11 => timed(11, || negative_regularity(&o)),
        12 => timed(12, || concentration_covariance(&o)),
        13 => timed(13, || determinism(&o)),
        _ => return Err(Error::InvalidArgument(format!("no criterion {id}"))),
    })
}

pub fn verify(ids: &[u32], opts: &VerifyOptions) -> Result<VerifyReport> {
    opts.validate()?;
    let results = ids.iter().map(|&id| run_criterion(id, opts)).collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport { seed: opts.seed, results })
}

pub fn verify_all(opts: &VerifyOptions) -> Result<VerifyReport> {
    let ids: Vec<u32> = CRITERIA.iter().map(|c| c.0).collect();
    verify(&ids, opts)
}

fn ground_state_mass(opts: &VerifyOptions) -> Result<Outcome> {
    let q = petviashvili_solve(soliton_grid(opts)?, 1e-10, 2000)?;
    let exact = 3f64.sqrt() * std::f64::consts::PI / 2.0;
    let rel = (q.mass - exact).abs() / exact;
    Ok(Outcome {
        passed: rel < 1e-8,
        measured: rel,
        threshold: 1e-8,
        detail: format!("M(Q)={:.10} iterations={}", q.mass, q.iterations),
    })
}

/// Evolves Q under `mu` and compares with e^{it}Q. Passing
/// `Nonlinearity::Defocusing` makes this fail, which checks the checker.
pub fn soliton_fidelity(opts: &VerifyOptions, mu: Nonlinearity) -> Result<Outcome> {
    let q = ground_state(soliton_grid(opts)?)?;
    let cfg = SolverConfig::new(mu, 1, 1e-4).with_store_every(0.01);
    let traj = evolve(&q.field, (0.0, 1.0), &cfg)?;
    let mut err: f64 = 0.0;
    for (t, u) in traj.times.iter().zip(&traj.fields) {
        err = err.max(l2_distance(u, &q.field.scale(Complex64::from_polar(1.0, *t)))?);
    }
    let ok = !traj.diverged && traj.end() == 1.0;
    Ok(Outcome {
        passed: ok && err < 1e-6 && traj.mass_drift < 1e-8,
        measured: err,
        threshold: 1e-6,
        detail: format!("mass_drift={:.2e} (< 1e-8)", traj.mass_drift),
    })
}

fn free_oracle() -> Result<Outcome> {
    // wide box so the periodic images of the spreading Gaussian stay negligible
    let g = make_grid(1, 1024, 32.0)?;
    let u0 = Field::from_real_fn(g, |x| (-x[0] * x[0]).exp());
    let mut worst: f64 = 0.0;
    for t in [0.1, 0.5, 1.0] {
        let exact = Field::from_fn(g, |x| {
            let a = Complex64::new(1.0, 4.0 * t);
            a.powf(-0.5) * (-x[0] * x[0] / a).exp()
        });
        worst = worst.max(l2_distance(&free_propagate(&u0, t), &exact)?);
    }
    Ok(Outcome { passed: worst < 1e-8, measured: worst, threshold: 1e-8, detail: "L=32 n=1024".into() })
}

fn random_element(rng: &mut ChaCha8Rng, dim: usize, spread: f64, log2_lambda: f64) -> GroupElement {
    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
    let xi0 = (0..dim).map(|_| rng.gen_range(-spread..spread)).collect();
    let x0 = (0..dim).map(|_| rng.gen_range(-spread..spread)).collect();
    let lambda = 2f64.powf(rng.gen_range(-log2_lambda..log2_lambda));
    GroupElement::new(theta, xi0, x0, lambda).expect("valid element")
}

fn group_axioms(opts: &VerifyOptions) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut algebra: f64 = 0.0;
    for _ in 0..200 {
        let a = random_element(&mut rng, 2, 3.0, 1.0);
        let b = random_element(&mut rng, 2, 3.0, 1.0);
        let c = random_element(&mut rng, 2, 3.0, 1.0);
        let left = compose(&compose(&a, &b), &c);
        let right = compose(&a, &compose(&b, &c));
        let id = GroupElement::identity(2);
        algebra = algebra
            .max(left.max_param_diff(&right))
            .max(compose(&a, &inverse(&a)).max_param_diff(&id))
            .max(compose(&inverse(&a), &a).max_param_diff(&id));
    }
    let g = make_grid(1, 512, 16.0)?;
    let f = Field::from_fn(g, |x| Complex64::from_polar((-x[0] * x[0] / 2.0).exp(), 0.4 * x[0]));
    let m = mass(&f);
    let elements: Vec<GroupElement> = (0..50).map(|_| random_element(&mut rng, 1, 2.0, 0.5)).collect();
    let drifts = opts.exec.map(&elements, |e| apply(e, &f).map(|h| (mass(&h) - m).abs() / m));
    let unitarity = drifts.into_iter().collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
    Ok(Outcome {
        passed: algebra < 1e-12 && unitarity < 1e-9,
        measured: algebra,
        threshold: 1e-12,
        detail: format!("mass drift under apply {unitarity:.2e} (< 1e-9)"),
    })
}

fn covariance() -> Result<Outcome> {
    let g = make_grid(1, 1024, 32.0)?;
    let u0 = Field::from_real_fn(g, |x| (-x[0] * x[0] / 2.0).exp());
    let cfg = SolverConfig::new(Nonlinearity::Defocusing, 1, 1e-3).with_store_every(0.05);
    let traj = evolve(&u0, (0.0, 1.0), &cfg)?;
    let boost = GroupElement::modulation(vec![1.5]);
    let boosted = evolve(&apply(&boost, &u0)?, (0.0, 1.0), &cfg)?;
    let mapped = apply_trajectory(&boost, &traj)?;
    let mut err: f64 = 0.0;
    for (a, b) in boosted.fields.iter().zip(&mapped.fields) {
        err = err.max(l2_distance(a, b)?);
    }
    let g_any = GroupElement::new(0.3, vec![0.5], vec![1.0], 1.5)?;
    let s = scattering_size(&traj);
    let s_rel = (scattering_size(&apply_trajectory(&g_any, &traj)?) - s).abs() / s;
    Ok(Outcome {
        passed: err < 1e-5 && s_rel < 1e-6 && boosted.times == mapped.times,
        measured: err,
        threshold: 1e-5,
        detail: format!("S invariance {s_rel:.2e} (< 1e-6)"),
    })
}

fn pseudoconformal_involution() -> Result<Outcome> {
    let g = make_grid(1, 1024, 32.0)?;
    let q = ground_state(g)?;
    let times: Vec<f64> = (0..=30).map(|k| 0.5 + 0.05 * k as f64).collect();
    let u = exact_soliton(&q, &GroupElement::identity(1), &times)?;
    let v = pseudoconformal(&u)?;
    let w = pseudoconformal(&v)?;
    let mut err: f64 = 0.0;
    for (a, b) in u.fields.iter().zip(&w.fields) {
        err = err.max(l2_distance(a, b)?);
    }
    let m0 = mass(&u.fields[0]);
    let mass_err = v.fields.iter().map(|f| (mass(f) - m0).abs() / m0).fold(0.0, f64::max);
    let times_ok = u.times.iter().zip(&w.times).all(|(a, b)| (a - b).abs() < 1e-12);
    Ok(Outcome {
        passed: err < 1e-4 && mass_err < 1e-6 && times_ok && !v.diverged && !w.diverged,
        measured: err,
        threshold: 1e-4,
        detail: format!("mass error {mass_err:.2e} (< 1e-6)"),
    })
}

fn duhamel_convergence(opts: &VerifyOptions) -> Result<Outcome> {
    let q = ground_state(soliton_grid(opts)?)?;
    let dts = [4e-3, 2e-3, 1e-3, 5e-4];
    let residuals = opts.exec.map(&dts, |&dt| -> Result<f64> {
        let cfg = SolverConfig::new(Nonlinearity::Focusing, 1, dt).with_store_every(dt);
        let traj = evolve(&q.field, (0.0, 0.5), &cfg)?;
        Ok(duhamel_residual(&traj, 0.0, 0.5)?.duhamel_l2)
    });
    let residuals = residuals.into_iter().collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = residuals.windows(2).map(|w| w[0] / w[1]).collect();
    let worst = ratios.iter().map(|r| (r - 4.0).abs()).fold(0.0, f64::max);
    Ok(Outcome {
        passed: ratios.iter().all(|r| (3.5..=4.5).contains(r)),
        measured: ratios.iter().cloned().fold(f64::NAN, |a, b| if (b - 4.0).abs() >= (a - 4.0).abs() || a.is_nan() { b } else { a }),
        threshold: 4.0,
        detail: format!(
            "ratios {:?} (in [3.5, 4.5]); residuals {:?}; max |ratio-4|={worst:.3}",
            ratios.iter().map(|r| (r * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
            residuals.iter().map(|r| format!("{r:.2e}")).collect::<Vec<_>>()
        ),
    })
}

fn profile_recovery(opts: &VerifyOptions) -> Result<Outcome> {
    let g = make_grid(1, 512, 16.0)?;
    let mut popts = ProfileOptions::with_ground_state(g)?;
    popts.exec = opts.exec;
    let q = ground_state(g)?;
    let planted = EnlargedElement { base: GroupElement::new(0.7, vec![1.5], vec![-1.2], 1.3)?, t0: 0.37 };
    let u = apply_enlarged(&planted, &q.field)?;
    let dec = extract_profiles_with(&u, &popts)?;
    let first = dec.profiles.first().ok_or_else(|| Error::InvalidArgument("no profile extracted".into()))?;
    let captured = first.captured_mass / q.mass;
    let orbit = orbit_distance(first.phi(), &q.field)? / l2_norm(&q.field);

    let g2 = make_grid(1, 2048, 16.0)?;
    let mut popts2 = ProfileOptions::with_ground_state(g2)?;
    popts2.exec = opts.exec;
    let q2 = ground_state(g2)?;
    let a = EnlargedElement { base: GroupElement::new(0.0, vec![45.0], vec![-5.0], 1.0)?, t0: 0.0 };
    let b = EnlargedElement { base: GroupElement::new(1.0, vec![-45.0], vec![5.0], 1.0)?, t0: 0.0 };
    let sep = separation(&a, &b);
    let u2 = apply_enlarged(&a, &q2.field)?.add(&apply_enlarged(&b, &q2.field)?)?;
    let dec2 = extract_profiles_with(&u2, &popts2)?;
    let defect = dec2.decoupling_defect / mass(&u2);
    let two_ok = dec2.profiles.len() >= 2 && dec2.profiles[..2].iter().all(|p| p.captured_mass >= 0.95 * q2.mass);
    Ok(Outcome {
        passed: captured >= 0.99 && orbit < 0.05 && sep > 100.0 && defect < 0.02 && two_ok,
        measured: captured,
        threshold: 0.99,
        detail: format!(
            "orbit distance {orbit:.2e}·‖Q‖ (< 0.05); two bubbles at separation {sep:.0}: {} profiles, defect {defect:.2e}·M(u) (< 0.02)",
            dec2.profiles.len()
        ),
    })
}

/// x e^{-x²/2}: mean zero, so its free evolution decays like t^{-3/2} near
/// the origin and its overlaps fall off fast enough to see on a desk grid.
pub fn hermite_profile(grid: Grid) -> Field {
    Field::from_real_fn(grid, |x| x[0] * (-x[0] * x[0] / 2.0).exp())
}

/// Times on [−t_ref, t_ref] clustered quadratically at 0, where the
/// narrowest bubbles spend their scattering size.
pub fn clustered_times(t_ref: f64, half_nodes: usize) -> Vec<f64> {
    let k = half_nodes as f64;
    let pos: Vec<f64> = (1..=half_nodes).map(|j| t_ref * (j as f64 / k).powi(2)).collect();
    pos.iter().rev().map(|t| -t).chain(std::iter::once(0.0)).chain(pos.iter().copied()).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxisTrend {
    pub axis: String,
    pub separations: Vec<f64>,
    /// |⟨a, b⟩| / ‖φ‖²
    pub inner: Vec<f64>,
    pub s_gap: Vec<f64>,
}

impl AxisTrend {
    pub fn final_ratios(&self) -> (f64, f64) {
        let n = self.inner.len() - 1;
        (self.inner[n] / self.inner[0], self.s_gap[n] / self.s_gap[0])
    }
}

/// Sweeps a second copy of the Hermite bubble away from the first along
/// each of the five terms of the separation functional.
pub fn decoupling_sweep(exec: Exec) -> Result<Vec<AxisTrend>> {
    let g = make_grid(1, 65536, 1024.0)?;
    let phi = hermite_profile(g);
    let norm2 = mass(&phi);
    let times = clustered_times(4.0, 400);
    let elem = |lambda: f64, t0: f64, xi: f64, x: f64| EnlargedElement {
        base: GroupElement { theta: 0.0, xi0: vec![xi], x0: vec![x], lambda },
        t0,
    };
    let axes: Vec<(&str, Vec<EnlargedElement>)> = vec![
        ("lambda_up", [1.0, 2.0, 4.0, 8.0, 16.0, 32.0].iter().map(|&l| elem(l, 0.0, 0.0, 0.0)).collect()),
        ("lambda_down", [1.0, 0.5, 0.25, 0.125, 0.0625].iter().map(|&l| elem(l, 0.0, 0.0, 0.0)).collect()),
        ("t0", [0.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0].iter().map(|&t| elem(1.0, t, 0.0, 0.0)).collect()),
        ("xi0", [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0].iter().map(|&x| elem(1.0, 0.0, x, 0.0)).collect()),
        ("x0", [0.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0].iter().map(|&x| elem(1.0, 0.0, 0.0, x)).collect()),
    ];
    let a_elem = elem(1.0, 0.0, 0.0, 0.0);
    let jobs: Vec<(usize, EnlargedElement)> =
        axes.iter().enumerate().flat_map(|(i, (_, es))| es.iter().map(move |e| (i, e.clone()))).collect();
    let rows = exec.map(&jobs, |(_, e)| -> Result<(f64, f64, f64)> {
        let a = apply_enlarged(&a_elem, &phi)?;
        let b = apply_enlarged(e, &phi)?;
        let ip = inner(&a, &b)?.norm() / norm2;
        Ok((separation(&a_elem, e), ip, scattering_gap(&[a, b], &times)?))
    });
    let mut out: Vec<AxisTrend> = axes
        .iter()
        .map(|(name, _)| AxisTrend { axis: name.to_string(), separations: vec![], inner: vec![], s_gap: vec![] })
        .collect();
    for ((i, _), row) in jobs.iter().zip(rows) {
        let (s, ip, gap) = row?;
        out[*i].separations.push(s);
        out[*i].inner.push(ip);
        out[*i].s_gap.push(gap);
    }
    Ok(out)
}

fn decoupling_trends(opts: &VerifyOptions) -> Result<Outcome> {
    let trends = decoupling_sweep(opts.exec)?;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for t in &trends {
        let (ri, rs) = t.final_ratios();
        worst = worst.max(ri).max(rs);
        parts.push(format!("{}: inner {ri:.1e} S_gap {rs:.1e}", t.axis));
    }
    Ok(Outcome { passed: worst < 0.05, measured: worst, threshold: 0.05, detail: parts.join("; ") })
}

fn small_data_power_law(opts: &VerifyOptions) -> Result<Outcome> {
    let g = make_grid(1, 1024, 64.0)?;
    let shape = Field::from_real_fn(g, |x| (-x[0] * x[0] / 2.0).exp());
    let m_shape = mass(&shape);
    let masses = [1e-3, 4e-3, 1.6e-2];
    let cfg = SolverConfig::new(Nonlinearity::Defocusing, 1, 1e-3).with_store_every(0.01);
    let sizes = opts.exec.map(&masses, |&m| -> Result<f64> {
        let u0 = shape.scale(Complex64::new((m / m_shape).sqrt(), 0.0));
        Ok(scattering_size(&evolve(&u0, (0.0, 5.0), &cfg)?))
    });
    let sizes = sizes.into_iter().collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = masses.iter().map(|m| m.ln()).collect();
    let ys: Vec<f64> = sizes.iter().map(|s| s.ln()).collect();
    let slope = least_squares_slope(&xs, &ys);
    Ok(Outcome {
        passed: (slope - 3.0).abs() <= 0.15,
        measured: slope,
        threshold: 3.0,
        detail: format!("fitted exponent vs (d+2)/d = 3 +- 0.15; S = {}", sizes.iter().map(|s| format!("{s:.3e}")).collect::<Vec<_>>().join(" ")),
    })
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn negative_regularity(opts: &VerifyOptions) -> Result<Outcome> {
    let s = 0.1;
    let shape = CutoffShape::RaisedCosine;
    let data = |g: Grid| {
        let f = Field::from_real_fn(g, |x| (-x[0] * x[0] / 2.0).exp());
        let c = (1e-2 / mass(&f)).sqrt();
        f.scale(Complex64::new(c, 0.0))
    };
    let base_grid = make_grid(1, 512, 16.0)?;
    let a = envelope_constant(&data(base_grid), s, shape);
    let runs = [(512usize, 1e-3), (512, 5e-4), (1024, 1e-3)];
    let ratios = opts.exec.map(&runs, |&(n, dt)| -> Result<(f64, bool)> {
        let g = make_grid(1, n, 16.0)?;
        let cfg = SolverConfig::new(Nonlinearity::Defocusing, 1, dt).with_store_every(0.02);
        let r = negative_regularity_check(&data(g), a, s, (0.0, 2.0), &cfg, shape, Exec::Sequential)?;
        Ok((r.worst_ratio, r.hypothesis_holds && !r.diverged))
    });
    let ratios = ratios.into_iter().collect::<Result<Vec<_>>>()?;
    let base = ratios[0].0;
    let change = ratios[1..].iter().map(|(w, _)| (w / base - 1.0).abs()).fold(0.0, f64::max);
    Ok(Outcome {
        passed: change <= 0.2 && ratios.iter().all(|r| r.1),
        measured: change,
        threshold: 0.2,
        detail: format!(
            "worst_ratio base {:.4} dt/2 {:.4} 2n {:.4}",
            ratios[0].0, ratios[1].0, ratios[2].0
        ),
    })
}

fn concentration_covariance(opts: &VerifyOptions) -> Result<Outcome> {
    let g = soliton_grid(opts)?;
    let q = ground_state(g)?;
    let n_q = scale(&q.field, 0.1)?;
    let n_wide = scale(&apply(&GroupElement::dilation(2.0, 1), &q.field)?, 0.1)?;
    let n_narrow = scale(&apply(&GroupElement::dilation(0.5, 1), &q.field)?, 0.1)?;
    let dyadic_ok = n_wide == n_q / 2.0 && n_narrow == n_q * 2.0;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    let mut center_err: f64 = 0.0;
    for _ in 0..10 {
        let x0 = rng.gen_range(-4.0..4.0);
        let xi0 = rng.gen_range(-8.0..8.0);
        let theta = rng.gen_range(0.0..std::f64::consts::TAU);
        let h = apply(&GroupElement::new(theta, vec![xi0], vec![x0], 1.0)?, &q.field)?;
        let (x, xi) = centers(&h)?;
        center_err = center_err.max(((x[0] - x0).abs() / g.spacing()).max((xi[0] - xi0).abs() / g.dxi()));
    }

    let etas = [0.01, 0.05, 0.1, 0.2, 0.5];
    let cfg = SolverConfig::new(Nonlinearity::Focusing, 1, 1e-3).with_store_every(0.1);
    let soliton = evolve(&q.field, (0.0, 1.0), &cfg)?;
    let pair = two_bubble_track(&q, 6.0)?;
    let mut monotone = true;
    for traj in [&soliton, &pair] {
        monotone &= concentration_profile(traj, &etas)?.is_monotone();
    }
    Ok(Outcome {
        passed: dyadic_ok && center_err <= 1.0 && monotone,
        measured: center_err,
        threshold: 1.0,
        detail: format!(
            "N(Q)={n_q} N(Q(x/2))={n_wide} N(Q(2x))={n_narrow}; center error in cells (<= 1); C(eta) monotone: {monotone}"
        ),
    })
}

/// Two exact solitons boosted to ±`xi`, separating at speed 4·`xi`.
pub fn two_bubble_track(q: &GroundState, xi: f64) -> Result<Trajectory> {
    let times: Vec<f64> = (0..=10).map(|k| 0.1 * k as f64).collect();
    let left = exact_soliton(q, &GroupElement::new(0.0, vec![-xi], vec![0.0], 1.0)?, &times)?;
    let right = exact_soliton(q, &GroupElement::new(0.0, vec![xi], vec![0.0], 1.0)?, &times)?;
    Trajectory::sum(&[left, right])
}

fn determinism(opts: &VerifyOptions) -> Result<Outcome> {
    // everything but the decoupling sweep, which alone takes minutes
    let subset = [1, 2, 3, 4, 5, 6, 7, 8, 10, 11, 12];
    let a = verify(&subset, opts)?.canonical_json();
    let b = verify(&subset, opts)?.canonical_json();
    Ok(Outcome {
        passed: a == b,
        measured: if a == b { 0.0 } else { 1.0 },
        threshold: 0.0,
        detail: format!("criteria {subset:?} twice, {} report bytes, identical: {}", a.len(), a == b),
    })
}
