//! The file-level subcommands: groundstate, decompose, transform, norms.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use mcnls::grid::{boundary_fraction, l2_norm, lp_norm, mass};
use mcnls::groundstate::petviashvili_solve;
use mcnls::io::{read_field, read_trajectory, write_field};
use mcnls::profiles::{
    decoupling_check, extract_profiles_radial_with, extract_profiles_with, orthogonality_report, ProfileOptions,
};
use mcnls::propagator::{scattering_size, spacetime_lp_norm};
use mcnls::symmetry::{apply_enlarged, EnlargedElement, GroupElement};
use mcnls::{make_grid, Exec};
use serde_json::{json, Value};

pub struct GroundStateArgs {
    pub dim: usize,
    pub points: usize,
    pub half_width: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub out: PathBuf,
}

/// Solves for Q and writes the snapshot plus a `.json` sidecar.
pub fn groundstate(a: &GroundStateArgs) -> Result<Value> {
    let grid = make_grid(a.dim, a.points, a.half_width)?;
    let q = petviashvili_solve(grid, a.tol, a.max_iter)?;
    write_field(&a.out, &q.field)?;
    let sidecar = a.out.with_extension("json");
    let summary = json!({
        "summary": q.summary(),
        "grid": grid,
        "asymmetry": q.asymmetry(),
        "residual_history": q.residual_history,
    });
    fs::write(&sidecar, serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(json!({ "snapshot": a.out, "sidecar": sidecar, "summary": q.summary() }))
}

pub struct DecomposeArgs {
    pub input: PathBuf,
    pub max_profiles: usize,
    pub mass_floor: Option<f64>,
    pub radial: bool,
    pub gaussian_only: bool,
    pub out_dir: PathBuf,
    pub exec: Exec,
}

pub fn decompose(a: &DecomposeArgs) -> Result<Value> {
    let u = read_field(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let mut opts = if a.gaussian_only { ProfileOptions::new(u.grid) } else { ProfileOptions::with_ground_state(u.grid)? };
    opts.max_profiles = a.max_profiles;
    opts.mass_floor = a.mass_floor;
    opts.exec = a.exec;
    let dec = if a.radial { extract_profiles_radial_with(&u, &opts)? } else { extract_profiles_with(&u, &opts)? };
    let report = decoupling_check(&dec, &u, &opts.window_times())?;
    let seps = orthogonality_report(&dec);
    fs::create_dir_all(&a.out_dir)?;
    let mut files = vec![];
    for (k, p) in dec.profiles.iter().enumerate() {
        let name = format!("profile_{k}.bin");
        write_field(&a.out_dir.join(&name), p.phi())?;
        files.push(name);
    }
    write_field(&a.out_dir.join("remainder.bin"), dec.remainder())?;
    files.push("remainder.bin".into());
    let out = json!({
        "input": a.input,
        "decomposition": dec,
        "decoupling": report,
        "separation": seps,
        "files": files,
    });
    fs::write(a.out_dir.join("decomposition.json"), serde_json::to_string_pretty(&out)? + "\n")?;
    Ok(out)
}

pub struct TransformArgs {
    pub input: PathBuf,
    pub theta: f64,
    pub xi0: Vec<f64>,
    pub x0: Vec<f64>,
    pub lambda: f64,
    pub t0: f64,
    pub out: PathBuf,
}

fn fill(v: &[f64], d: usize, what: &str) -> Result<Vec<f64>> {
    match v.len() {
        0 => Ok(vec![0.0; d]),
        n if n == d => Ok(v.to_vec()),
        n => Err(anyhow!("{what} has {n} components; the snapshot is {d}-dimensional")),
    }
}

pub fn transform(a: &TransformArgs) -> Result<Value> {
    let u = read_field(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let d = u.grid.dim();
    let base = GroupElement::new(a.theta, fill(&a.xi0, d, "xi0")?, fill(&a.x0, d, "x0")?, a.lambda)?;
    let g = EnlargedElement { base, t0: a.t0 };
    let v = apply_enlarged(&g, &u)?;
    write_field(&a.out, &v)?;
    Ok(json!({
        "element": g,
        "output": a.out,
        "mass_in": mass(&u),
        "mass_out": mass(&v),
        "boundary_fraction_out": boundary_fraction(&v),
        "unresolved": v.diverged,
    }))
}

/// M and Lᵖ norms of a snapshot, or per-snapshot masses, S and spacetime
/// Lᵖ norms of a trajectory manifest.
pub fn norms(path: &Path, ps: &[f64]) -> Result<Value> {
    if path.extension().is_some_and(|e| e == "json") {
        let traj = read_trajectory(path).with_context(|| format!("reading {}", path.display()))?;
        let spacetime = ps
            .iter()
            .map(|&p| Ok(json!({ "p": p, "norm": spacetime_lp_norm(&traj, p)? })))
            .collect::<Result<Vec<_>>>()?;
        let masses = traj.masses();
        Ok(json!({
            "path": path,
            "kind": "trajectory",
            "snapshots": traj.len(),
            "interval": [traj.start(), traj.end()],
            "masses": masses,
            "mass_drift": traj.mass_drift,
            "scattering_size": scattering_size(&traj),
            "spacetime_lp": spacetime,
        }))
    } else {
        let f = read_field(path).with_context(|| format!("reading {}", path.display()))?;
        let lp = ps.iter().map(|&p| Ok(json!({ "p": p, "norm": lp_norm(&f, p)? }))).collect::<Result<Vec<_>>>()?;
        Ok(json!({
            "path": path,
            "kind": "snapshot",
            "grid": f.grid,
            "mass": mass(&f),
            "l2": l2_norm(&f),
            "lp": lp,
            "boundary_fraction": boundary_fraction(&f),
        }))
    }
}
