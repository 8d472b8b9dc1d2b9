//! The named scenarios. Each one runs its experiment, records metrics and
//! assertions on the [`Run`], and writes its CSV, snapshot and SVG
//! artifacts.

use anyhow::{anyhow, Result};
use mcnls::diagnostics::{
    bilinear_ratio, concentration_profile, envelope_constant, frequency_localization_report, galilean_functional,
    negative_regularity_check, project, ConcentrationTrack, CutoffShape, LPProjector, LocalizationOptions,
};
use mcnls::grid::{boundary_fraction, l2_distance, l2_norm, mass};
use mcnls::groundstate::{exact_soliton, petviashvili_solve, GroundState};
use mcnls::profiles::{decoupling_check, extract_profiles_with, orthogonality_report, ProfileOptions};
use mcnls::propagator::{
    blowup_monitor, duhamel_residual, evolve, free_trajectory, nyquist_guard, pseudoconformal, scattering_size,
    stability_experiment, stability_sweep, MonitorSample, Trajectory,
};
use mcnls::symmetry::{apply, apply_enlarged, separation, EnlargedElement, GroupElement};
use mcnls::verify::least_squares_slope;
use mcnls::{make_grid, Field, Grid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::Scenario;
use crate::plot::{abs_slice, Series};
use crate::run::{num, Run};

const ETAS: [f64; 5] = [0.01, 0.05, 0.1, 0.2, 0.5];

pub fn run_scenario(run: &mut Run) -> Result<()> {
    match run.config.scenario {
        Scenario::Soliton => soliton(run),
        Scenario::PcBlowup => pc_blowup(run),
        Scenario::Stability => stability(run),
        Scenario::ProfileDemo => profile_demo(run),
        Scenario::FreqLocal => freq_local(run),
        Scenario::BilinearBench => bilinear_bench(run),
        Scenario::NegRegularity => neg_regularity(run),
        Scenario::GalileanCheck => galilean_check(run),
    }
}

fn ground_state(grid: Grid) -> Result<GroundState> {
    Ok(petviashvili_solve(grid, 1e-10, 2000)?)
}

fn gaussian(grid: Grid, m: f64) -> Field {
    let f = Field::from_real_fn(grid, |x| (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp());
    let c = (m / mass(&f)).sqrt();
    f.scale(c.into())
}

fn max_boundary_fraction(traj: &Trajectory) -> f64 {
    traj.fields.iter().map(boundary_fraction).fold(0.0, f64::max)
}

fn concentration(run: &mut Run, traj: &Trajectory, name: &str) -> Result<ConcentrationTrack> {
    let track = concentration_profile(traj, &ETAS)?;
    run.write_text(&format!("{name}_c_eta.csv"), &track.to_csv())?;
    let pts = track.c_eta_table.iter().map(|r| (r.eta, r.c)).collect();
    run.chart(&format!("{name}_c_eta.svg"), "concentration constant", "eta", "C(eta)", &[Series::new("C", pts)])?;
    run.check_true(&format!("{name}_c_eta_monotone"), track.is_monotone());
    Ok(track)
}

fn soliton(run: &mut Run) -> Result<()> {
    let cfg = run.config.clone();
    let grid = cfg.grid.build()?;
    let q = ground_state(grid)?;
    run.metric("ground_state", q.summary());
    let (t0, t1) = (cfg.solver.t_start, cfg.solver.t_end);
    let traj = evolve(&q.field, (t0, t1), &cfg.solver.build(grid.dim()))?;
    let errors = traj
        .times
        .iter()
        .zip(&traj.fields)
        .map(|(t, u)| Ok(l2_distance(u, &q.field.scale(Complex64::from_polar(1.0, t - t0)))?))
        .collect::<Result<Vec<f64>>>()?;
    let sup_error = errors.iter().cloned().fold(0.0, f64::max);
    let completed = !traj.diverged && (traj.end() - t1).abs() < 1e-9;
    let boundary = max_boundary_fraction(&traj);

    run.metric("mass_drift", traj.mass_drift);
    run.metric("sup_error", sup_error);
    run.metric("scattering_size", scattering_size(&traj));
    run.metric("boundary_fraction", boundary);
    run.metric("diverged", traj.diverged);
    run.metric("final_time", traj.end());
    if traj.len() >= 3 {
        run.metric("residual", duhamel_residual(&traj, traj.start(), traj.end())?);
    }
    run.check_true("completed", completed);
    run.check_below("mass_drift", traj.mass_drift, 1e-8);
    run.check_below("sup_error", sup_error, 1e-6);
    run.check_below("boundary_fraction", boundary, 1e-3);

    let track = concentration(run, &traj, "soliton")?;
    run.metric("c_eta", &track.c_eta_table);
    run.write_trajectory("soliton", &traj, "|u(t, x)|, soliton")?;
    let rows: Vec<Vec<String>> = traj.times.iter().zip(&errors).map(|(t, e)| vec![num(*t), num(*e)]).collect();
    run.write_csv("soliton_error.csv", &["t", "error"], &rows)?;
    let m0 = mass(&traj.fields[0]);
    let drift = traj.times.iter().zip(traj.masses()).map(|(&t, m)| (t, (m - m0).abs() / m0)).collect();
    let scales = traj.times.iter().cloned().zip(track.scale.iter().cloned()).collect();
    run.chart("soliton_mass.svg", "relative mass drift", "t", "log10 |M(t) - M(0)| / M(0)", &[Series::new("drift", drift).log10()])?;
    run.chart("soliton_scale.svg", "frequency scale", "t", "N(t)", &[Series::new("N", scales)])?;
    Ok(())
}

fn monitor_rows(samples: &[MonitorSample]) -> Vec<Vec<String>> {
    samples.iter().map(|m| vec![num(m.t), num(m.scale), num(m.max_amplitude), num(m.mass_in_ball)]).collect()
}

fn pc_blowup(run: &mut Run) -> Result<()> {
    const SURPLUS: f64 = 1.05;
    let cfg = run.config.clone();
    let grid = cfg.grid.build()?;
    let q = petviashvili_solve(grid, 1e-11, 2000)?;
    let d = grid.dim();
    // source times 0.5·2^{k/10} map to −1/s ∈ [−2, −1/8]
    let times: Vec<f64> = (0..=40).map(|k| 0.5 * 2f64.powf(k as f64 / 10.0)).collect();
    let u = exact_soliton(&q, &GroupElement::identity(d), &times)?;
    let v = pseudoconformal(&u)?;
    // images of s far from 1 are dilated past the box, so the involution
    // is checked near s = 1
    let core = u.restrict(0.8, 1.25)?;
    let w = pseudoconformal(&pseudoconformal(&core)?)?;
    let mut involution: f64 = 0.0;
    for (a, b) in core.fields.iter().zip(&w.fields) {
        involution = involution.max(l2_distance(a, b)?);
    }
    let mass_error = v.fields.iter().map(|f| (mass(f) - q.mass).abs() / q.mass).fold(0.0, f64::max);
    let monitor = blowup_monitor(&v, 1.0);
    let scales: Vec<f64> = monitor.iter().map(|m| m.scale).collect();
    let levels = (scales[scales.len() - 1] / scales[0]).log2();
    let guard = nyquist_guard(&grid);

    let solver = cfg.solver.build(d);
    let numeric = evolve(&v.fields[0].scale(SURPLUS.into()), (v.start(), cfg.solver.t_end), &solver)?;
    let numeric_monitor = blowup_monitor(&numeric, 1.0);

    run.metric("ground_state", q.summary());
    run.metric("involution_error", involution);
    run.metric("mass_error", mass_error);
    run.metric("dyadic_levels_gained", levels);
    run.metric("nyquist_guard", guard);
    run.metric("pc_interval", [v.start(), v.end()]);
    run.metric("numeric_amplitude_factor", SURPLUS);
    run.metric("numeric_diverged", numeric.diverged);
    run.metric("numeric_stop_time", numeric.end());
    run.check_below("involution_error", involution, 1e-4);
    run.check_below("mass_error", mass_error, 1e-6);
    run.check_true("scale_monotone", scales.windows(2).all(|p| p[1] >= p[0]));
    run.check_above("dyadic_levels_gained", levels, 3.0);
    run.check_true("pc_below_guard", scales[scales.len() - 1] <= guard && !v.diverged);
    run.check_true("numeric_blowup_detected", numeric.diverged && numeric.end() < cfg.solver.t_end);

    let header = ["t", "N", "max_amplitude", "mass_in_ball"];
    run.write_csv("pc_monitor.csv", &header, &monitor_rows(&monitor))?;
    run.write_csv("numeric_monitor.csv", &header, &monitor_rows(&numeric_monitor))?;
    run.write_trajectory("pc", &v, "|v(t, x)|, pseudoconformal soliton")?;
    run.write_trajectory("numeric", &numeric, "|u(t, x)|, numerical run above threshold")?;
    let log_scale = |ms: &[MonitorSample]| ms.iter().map(|m| (m.t, m.scale)).collect::<Vec<_>>();
    run.chart(
        "blowup_scale.svg",
        "frequency scale approaching t = 0",
        "t",
        "log10 N(t)",
        &[Series::new("pseudoconformal", log_scale(&monitor)).log10(), Series::new("numerical", log_scale(&numeric_monitor)).log10()],
    )?;
    Ok(())
}

/// A sum of four Gaussians with seeded centers, widths and complex weights.
fn random_direction(grid: Grid, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = grid.dim();
    let bumps: Vec<([f64; 2], f64, Complex64)> = (0..4)
        .map(|_| {
            let c = [rng.gen_range(-2.0..2.0), if d == 2 { rng.gen_range(-2.0..2.0) } else { 0.0 }];
            let w = rng.gen_range(0.5..1.5);
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (c, w, z)
        })
        .collect();
    Field::from_fn(grid, |x| {
        bumps
            .iter()
            .map(|(c, w, z)| {
                let r2: f64 = (0..d).map(|a| (x[a] - c[a]).powi(2)).sum();
                z * (-r2 / (2.0 * w * w)).exp()
            })
            .sum()
    })
}

fn stability(run: &mut Run) -> Result<()> {
    let cfg = run.config.clone();
    let grid = cfg.grid.build()?;
    let u0 = gaussian(grid, 0.5);
    let u = evolve(&u0, (cfg.solver.t_start, cfg.solver.t_end), &cfg.solver.build(grid.dim()))?;
    let same = stability_experiment(&u, &u0)?;
    let direction = random_direction(grid, cfg.seed);
    let deltas = [1e-3, 1e-2, 1e-1];
    let sweep = stability_sweep(&u, &direction, &deltas, run.exec)?;
    let growth = sweep.rows.windows(2).map(|w| w[1].s_diff / w[0].s_diff).fold(f64::INFINITY, f64::min);
    let xs: Vec<f64> = sweep.rows.iter().map(|r| r.delta.ln()).collect();
    let ys: Vec<f64> = sweep.rows.iter().map(|r| r.s_diff.ln()).collect();

    run.metric("reference_mass_drift", u.mass_drift);
    run.metric("identical_data_s_diff", same.s_diff);
    run.metric("sweep", &sweep);
    run.metric("s_diff_exponent", least_squares_slope(&xs, &ys));
    run.check_true("reference_completed", !u.diverged);
    run.check_below("identical_data_s_diff", same.s_diff, 1e-10);
    run.check_true("sweep_monotone", sweep.passed);
    run.check_above("min_growth_per_decade", growth, 10.0);

    let rows: Vec<Vec<String>> = sweep
        .rows
        .iter()
        .map(|r| vec![num(r.delta), num(r.s_diff), num(r.max_mass_diff), r.diverged.to_string()])
        .collect();
    run.write_csv("stability.csv", &["delta", "s_diff", "max_mass_diff", "diverged"], &rows)?;
    run.write_trajectory("reference", &u, "|u(t, x)|, reference solution")?;
    let pts = sweep.rows.iter().map(|r| (r.delta.log10(), r.s_diff)).collect();
    run.chart("stability.svg", "S(u - v) against the data perturbation", "log10 delta", "log10 S(u - v)", &[Series::new("S(u - v)", pts).log10()])?;
    Ok(())
}

fn profile_demo(run: &mut Run) -> Result<()> {
    let cfg = run.config.clone();
    let grid = cfg.grid.build()?;
    let mut popts = ProfileOptions::with_ground_state(grid)?;
    popts.exec = run.exec;
    let q = ground_state(grid)?;
    let planted = [
        EnlargedElement { base: GroupElement::new(0.0, vec![45.0], vec![-5.0], 1.0)?, t0: 0.0 },
        EnlargedElement { base: GroupElement::new(1.0, vec![-45.0], vec![5.0], 1.0)?, t0: 0.0 },
    ];
    let u = apply_enlarged(&planted[0], &q.field)?.add(&apply_enlarged(&planted[1], &q.field)?)?;
    let planted_sep = separation(&planted[0], &planted[1]);
    let dec = extract_profiles_with(&u, &popts)?;
    let m_u = mass(&u);
    let report = decoupling_check(&dec, &u, &popts.window_times())?;
    let seps = orthogonality_report(&dec);

    // the same experiment in a seeded random gauge
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let h = GroupElement::new(
        rng.gen_range(0.0..std::f64::consts::TAU),
        vec![rng.gen_range(-2.0..2.0)],
        vec![rng.gen_range(-1.0..1.0)],
        1.0,
    )?;
    let dec_h = extract_profiles_with(&apply(&h, &u)?, &popts)?;
    let sorted = |mut v: Vec<f64>| {
        v.sort_by(|a, b| b.total_cmp(a));
        v
    };
    let (ca, cb) = (sorted(dec.captured_masses()), sorted(dec_h.captured_masses()));
    let gauge_gap = if ca.len() == cb.len() {
        ca.iter().zip(&cb).map(|(a, b)| (a - b).abs() / a).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };

    run.metric("ground_state_mass", q.mass);
    run.metric("planted", &planted);
    run.metric("planted_separation", planted_sep);
    run.metric("profile_count", dec.profiles.len());
    run.metric("captured_masses", dec.captured_masses());
    run.metric("decoupling_defect_fraction", dec.decoupling_defect / m_u);
    run.metric("decoupling", report);
    run.metric("separation", &seps);
    run.metric("gauge", &h);
    run.metric("gauge_captured_gap", gauge_gap);
    run.check_true("two_profiles", dec.profiles.len() == 2);
    run.check_above(
        "min_captured_fraction",
        dec.captured_masses().iter().cloned().fold(f64::INFINITY, f64::min) / q.mass,
        0.95,
    );
    run.check_below("decoupling_defect_fraction", dec.decoupling_defect / m_u, 0.02);
    run.check_above("planted_separation", planted_sep, 100.0);
    run.check_true("fits_distinct", !seps.suspect);
    run.check_below("gauge_captured_gap", gauge_gap, 0.02);

    run.write_field("input.bin", &u)?;
    let mut series = vec![Series::new("|u|", abs_slice(&u))];
    let mut rows = vec![];
    for (k, p) in dec.profiles.iter().enumerate() {
        run.write_field(&format!("profile_{k}.bin"), p.phi())?;
        series.push(Series::new(format!("bubble {k}"), abs_slice(&p.bubble()?)));
        let b = &p.fit.base;
        rows.push(vec![
            k.to_string(),
            p.template.clone(),
            num(p.captured_mass),
            num(p.template_distance),
            num(b.theta),
            num(b.xi0[0]),
            num(b.x0[0]),
            num(b.lambda),
            num(p.fit.t0),
        ]);
    }
    run.write_field("remainder.bin", dec.remainder())?;
    series.push(Series::new("|remainder|", abs_slice(dec.remainder())));
    run.write_json("decomposition.json", &json!({ "decomposition": dec, "decoupling": report, "separation": seps }))?;
    run.write_csv(
        "profiles.csv",
        &["k", "template", "captured_mass", "template_distance", "theta", "xi0", "x0", "lambda", "t0"],
        &rows,
    )?;
    run.chart("profiles.svg", "input, extracted bubbles and remainder", "x", "modulus", &series)?;
    Ok(())
}

fn freq_local(run: &mut Run) -> Result<()> {
    let cfg = run.config.clone();
    let grid = cfg.grid.build()?;
    let d = grid.dim();
    let q = ground_state(grid)?;
    let traj = evolve(&q.field, (cfg.solver.t_start, cfg.solver.t_end), &cfg.solver.build(d))?;
    let opts = LocalizationOptions::default();
    let eta = 0.1;
    let mut rows = vec![];
    let (mut high_ok, mut band_ok, mut localized) = (true, true, 0usize);
    for (t, u) in traj.times.iter().zip(&traj.fields) {
        let r = frequency_localization_report(u, eta, opts)?;
        let norm = l2_norm(u);
        high_ok &= r.high_mass <= eta * norm;
        band_ok &= r.band_mass >= norm / 2.0;
        localized += r.localized as usize;
        rows.push((*t, r, norm));
    }
    let n_q = frequency_localization_report(&q.field, eta, opts)?.n_loc;
    let mut covariant = true;
    let mut dilations = vec![];
    for lambda in [0.25, 0.5, 2.0] {
        let n = frequency_localization_report(&apply(&GroupElement::dilation(lambda, d), &q.field)?, eta, opts)?.n_loc;
        covariant &= n == n_q / lambda;
        dilations.push(json!({ "lambda": lambda, "n_loc": n }));
    }
    let narrow = apply(&GroupElement::dilation(1.0 / 64.0, d), &q.field)?;
    let two_scale = q.field.add(&narrow.scale((1.0 / 2f64.sqrt()).into()))?;
    let two = frequency_localization_report(&two_scale, eta, opts)?;

    run.metric("eta", eta);
    run.metric("options", opts);
    run.metric("n_loc_q", n_q);
    run.metric("dilations", dilations);
    run.metric("localized_snapshots", localized);
    run.metric("snapshots", traj.len());
    run.metric("two_scale", two);
    run.check_true("evolution_completed", !traj.diverged);
    run.check_true("high_tail_small", high_ok);
    run.check_true("band_holds_half", band_ok);
    run.check_true("dilation_covariant", covariant);
    run.check_true("two_scale_not_localized", !two.localized);

    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|(t, r, n)| {
            vec![num(*t), num(r.n_loc), num(r.low_mass), num(r.band_mass), num(r.high_mass), num(*n), r.localized.to_string()]
        })
        .collect();
    run.write_csv("freq_local.csv", &["t", "n_loc", "low", "band", "high", "norm", "localized"], &csv_rows)?;
    let series = |f: fn(&mut (f64, mcnls::diagnostics::FrequencyLocalization, f64)) -> f64, name: &str| {
        let mut rs = rows.clone();
        Series::new(name, rs.iter_mut().map(|r| (r.0, f(r) / r.2)).collect())
    };
    run.chart(
        "freq_local.svg",
        "Littlewood-Paley pieces relative to the L2 norm",
        "t",
        "fraction of norm",
        &[series(|r| r.1.low_mass, "low"), series(|r| r.1.band_mass, "band"), series(|r| r.1.high_mass, "high")],
    )?;
    run.write_trajectory("soliton", &traj, "|u(t, x)|, soliton")?;
    Ok(())
}

/// Gaussian in frequency about `center`, cut sharply to |ξ| ≤ n and
/// normalized to unit mass.
fn bump(grid: Grid, center: f64, width: f64, n: f64) -> Field {
    let f = Field::from_fn(grid, |x| Complex64::from_polar((-(x[0] * width).powi(2) / 2.0).exp(), center * x[0]));
    let f = project(&f, &LPProjector::low(n, CutoffShape::Sharp));
    let c = (1.0 / mass(&f)).sqrt();
    f.scale(c.into())
}

fn bilinear_bench(run: &mut Run) -> Result<()> {
    let grid = run.config.grid.build()?;
    let scales = [8.0, 16.0, 32.0];
    let q = 2.0;
    let pair = |n: f64| -> Result<(Trajectory, Trajectory, f64)> {
        let t = 0.5 * (8.0 / n).powi(2);
        let times: Vec<f64> = (0..=200).map(|k| -t + 2.0 * t * k as f64 / 200.0).collect();
        let a = bump(grid, n / 2.0, n / 16.0, n);
        let b = bump(grid, -n / 2.0, n / 16.0, n);
        Ok((free_trajectory(&a, &times)?, free_trajectory(&b, &times)?, t))
    };
    let results = run.exec.map(&scales, |&n| -> Result<(f64, f64)> {
        let (a, b, t) = pair(n)?;
        Ok((t, bilinear_ratio(&a, &b, q, n, n / 4.0)?))
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let r8 = results[0].1;
    let spread = results.iter().map(|r| (r.1 / r8 - 1.0).abs()).fold(0.0, f64::max);
    let (a, b, _) = pair(16.0)?;
    let guarded = bilinear_ratio(&a, &b, q, 16.0, 30.0).is_err();

    run.metric("exponent_q", q);
    run.metric("ratios", results.iter().zip(&scales).map(|(r, n)| json!({ "N": n, "T": r.0, "ratio": r.1 })).collect::<Vec<_>>());
    run.metric("max_relative_spread", spread);
    run.check_below("max_relative_spread", spread, 0.3);
    run.check_true("separation_guard", guarded);

    let rows: Vec<Vec<String>> = results.iter().zip(&scales).map(|(r, n)| vec![num(*n), num(r.0), num(r.1)]).collect();
    run.write_csv("bilinear.csv", &["N", "T", "ratio"], &rows)?;
    let pts = results.iter().zip(&scales).map(|(r, n)| (n.log2(), r.1)).collect();
    run.chart("bilinear.svg", "normalized bilinear ratio", "log2 N", "ratio", &[Series::new("ratio", pts)])?;
    Ok(())
}

fn neg_regularity(run: &mut Run) -> Result<()> {
    let cfg = run.config.clone();
    let s = 0.1;
    let shape = CutoffShape::RaisedCosine;
    let data = |g: Grid| gaussian(g, 1e-2);
    let base = cfg.grid.build()?;
    let a = envelope_constant(&data(base), s, shape);
    let (n, dt) = (cfg.grid.points, cfg.solver.dt);
    let runs = [("base", n, dt), ("half_dt", n, dt / 2.0), ("double_n", 2 * n, dt)];
    let reports = run.exec.map(&runs, |&(_, n, dt)| {
        let g = make_grid(1, n, cfg.grid.half_width)?;
        let mut solver = cfg.solver;
        solver.dt = dt;
        negative_regularity_check(&data(g), a, s, (cfg.solver.t_start, cfg.solver.t_end), &solver.build(1), shape, mcnls::Exec::Sequential)
    });
    let reports = reports.into_iter().collect::<mcnls::Result<Vec<_>>>()?;
    let w0 = reports[0].worst_ratio;
    let change = reports[1..].iter().map(|r| (r.worst_ratio / w0 - 1.0).abs()).fold(0.0, f64::max);

    run.metric("s", s);
    run.metric("envelope_constant", a);
    for ((name, _, _), r) in runs.iter().zip(&reports) {
        run.metric(&format!("worst_ratio_{name}"), r.worst_ratio);
        run.metric(&format!("hypothesis_ratio_{name}"), r.hypothesis_ratio);
    }
    run.metric("max_relative_change", change);
    run.check_true("hypothesis_holds", reports.iter().all(|r| r.hypothesis_holds));
    run.check_true("no_divergence", reports.iter().all(|r| !r.diverged));
    run.check_below("max_relative_change", change, 0.2);

    for ((name, _, _), r) in runs.iter().zip(&reports) {
        run.write_text(&format!("envelope_{name}.csv"), &r.to_csv())?;
    }
    let series: Vec<Series> = runs
        .iter()
        .zip(&reports)
        .map(|((name, _, _), r)| Series::new(*name, r.per_n_table.iter().map(|row| (row.n.log2(), row.bound_ratio)).collect()))
        .collect();
    run.chart("envelope.svg", "spacetime norm of P_N u over A N^s", "log2 N", "ratio", &series)?;
    Ok(())
}

fn galilean_check(run: &mut Run) -> Result<()> {
    let cfg = run.config.clone();
    let grid = cfg.grid.build()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let xi0 = (rng.gen_range(-6..=6) as f64) * 0.5;
    let f = Field::from_fn(grid, |x| Complex64::from_polar((-x[0] * x[0] / 2.0).exp(), xi0 * x[0]));
    let sweep: Vec<f64> = (-16..=16).map(|k| 0.25 * k as f64).collect();
    let values = run.exec.map(&sweep, |&xi| galilean_functional(&f, &[xi], 0.0));
    let values = values.into_iter().collect::<mcnls::Result<Vec<_>>>()?;
    let best = values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|p| p.0).ok_or_else(|| anyhow!("empty sweep"))?;
    let peak_offset = (sweep[best] + xi0).abs();

    // the zero mode of |∇|^{-1/4} is dropped, so dilations are compared on a wide box
    let wide = make_grid(1, 4096, 128.0)?;
    let g = Field::from_fn(wide, |x| Complex64::from_polar((-x[0] * x[0] / 2.0).exp(), 0.7 * x[0]));
    let xi = 0.4;
    let base = galilean_functional(&g, &[xi], 0.0)?;
    let mut dilation_gap: f64 = 0.0;
    for lambda in [0.5, 2.0] {
        let h = apply(&GroupElement::dilation(lambda, 1), &g)?;
        dilation_gap = dilation_gap.max((galilean_functional(&h, &[xi / lambda], 0.0)? / base - 1.0).abs());
    }

    run.metric("xi0", xi0);
    run.metric("argmax_xi", sweep[best]);
    run.metric("dilation_relative_gap", dilation_gap);
    run.check_below("peak_offset", peak_offset, 0.5 + 1e-12);
    run.check_below("dilation_relative_gap", dilation_gap, 0.02);

    let rows: Vec<Vec<String>> = sweep.iter().zip(&values).map(|(x, v)| vec![num(*x), num(*v)]).collect();
    run.write_csv("galilean.csv", &["xi", "value"], &rows)?;
    let pts = sweep.iter().cloned().zip(values.iter().cloned()).collect();
    run.chart("galilean.svg", "Galilean functional over the boost frequency", "xi", "value", &[Series::new("value", pts)])?;
    Ok(())
}
