//! `mcnls`: scenario runs, the acceptance suite and snapshot utilities.
//!
//! Exit status: 0 on success, 1 when assertions fail or a run errors out
//! (a JSON failure record goes to stderr), 2 on usage or configuration
//! errors.

mod config;
mod plot;
mod run;
mod scenarios;
mod tools;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mcnls::propagator::{Nonlinearity, StepPolicy};
use mcnls::verify::{verify, VerifyOptions, CRITERIA};
use mcnls::Exec;
use serde_json::json;

use config::{ConfigError, Overrides, Scenario, OUTPUT_ENV};

#[derive(Parser)]
#[command(name = "mcnls", version, about = "Numerical laboratory for the mass-critical NLS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named scenario and write its artifact tree.
    Run(RunArgs),
    /// Run the acceptance criteria and print one line per criterion.
    Verify(VerifyArgs),
    /// Solve for the ground state Q and write it as a snapshot.
    Groundstate(GroundStateCmd),
    /// Extract profiles from a snapshot.
    Decompose(DecomposeCmd),
    /// Apply a group element to a snapshot.
    Transform(TransformCmd),
    /// Mass, scattering size and Lp norms of a snapshot or trajectory.json.
    Norms(NormsCmd),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario name; may instead come from the config file.
    #[arg(value_enum)]
    scenario: Option<Scenario>,
    /// TOML settings, or a manifest.json from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Defaults to $MCNLS_OUTPUT_DIR/<scenario>, else mcnls-runs/<scenario>.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for independent sweep points.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    half_width: Option<f64>,
    #[arg(long, value_parser = parse_mu)]
    mu: Option<Nonlinearity>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t_end: Option<f64>,
    #[arg(long)]
    store_every: Option<f64>,
    #[arg(long, value_parser = parse_policy)]
    policy: Option<StepPolicy>,
}

fn parse_mu(s: &str) -> Result<Nonlinearity, String> {
    serde_json::from_value(json!(s)).map_err(|_| "expected focusing, defocusing or linear".to_string())
}

fn parse_policy(s: &str) -> Result<StepPolicy, String> {
    serde_json::from_value(json!(s)).map_err(|_| "expected fixed or adaptive".to_string())
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        let mut o = Overrides {
            scenario: self.scenario.map(|s| s.name()),
            seed: self.seed,
            jobs: self.jobs,
            output_dir: self.output_dir.clone(),
            ..Default::default()
        };
        o.grid.dim = self.dim;
        o.grid.points = self.points;
        o.grid.half_width = self.half_width;
        o.solver.mu = self.mu;
        o.solver.dt = self.dt;
        o.solver.t_start = self.t_start;
        o.solver.t_end = self.t_end;
        o.solver.store_every = self.store_every;
        o.solver.policy = self.policy;
        o
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = VerifyOptions::default().seed)]
    seed: u64,
    /// Points per axis of the one-dimensional soliton grid.
    #[arg(long, default_value_t = VerifyOptions::default().points)]
    points: usize,
    /// Comma-separated criterion numbers; all by default.
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<u32>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Also write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct GroundStateCmd {
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 512)]
    points: usize,
    #[arg(long, default_value_t = 16.0)]
    half_width: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    /// Snapshot path; the summary goes next to it with a .json extension.
    #[arg(long, default_value = "q.bin")]
    out: PathBuf,
}

#[derive(Args)]
struct DecomposeCmd {
    snapshot: PathBuf,
    #[arg(long, default_value_t = 8)]
    max_profiles: usize,
    /// Absolute stopping mass; 1e-3·M(u) by default.
    #[arg(long)]
    mass_floor: Option<f64>,
    /// Restrict to the radial subgroup.
    #[arg(long)]
    radial: bool,
    /// Search with the Gaussian template only, skipping the Q solve.
    #[arg(long)]
    gaussian_only: bool,
    #[arg(long, default_value = "decomposition")]
    output_dir: PathBuf,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct TransformCmd {
    snapshot: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    theta: f64,
    /// Comma-separated, one entry per dimension.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    xi0: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x0: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Time translation by the free flow.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    t0: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct NormsCmd {
    /// A snapshot (.bin) or a trajectory manifest (trajectory.json).
    path: PathBuf,
    /// Exponents of the Lp norms to report.
    #[arg(long, value_delimiter = ',', default_value = "2,6")]
    p: Vec<f64>,
}

enum Failure {
    Usage(String),
    Run(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Run(e)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.0)
    }
}

fn exec_for(jobs: usize) -> Result<Exec, Failure> {
    if jobs == 0 {
        return Err(Failure::Usage("jobs must be at least 1".into()));
    }
    if jobs == 1 {
        return Ok(Exec::Sequential);
    }
    mcnls::configure_threads(jobs).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(Exec::Parallel)
}

fn print_json(v: &serde_json::Value) {
    // a closed pipe (`| head`) is not an error worth a panic
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn cmd_run(args: &RunArgs) -> Result<bool, Failure> {
    let file = match &args.config {
        Some(p) => Overrides::from_file(p)?,
        None => Overrides::default(),
    };
    let env_root = std::env::var_os(OUTPUT_ENV).map(PathBuf::from);
    let cfg = config::resolve(&file, &args.overrides(), env_root)?;
    exec_for(cfg.jobs)?;
    let mut run = run::Run::new(cfg)?;
    scenarios::run_scenario(&mut run)?;
    for c in &run.checks {
        println!(
            "[{}] {:<32} measured={:<12.4e} threshold={:.3e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.threshold
        );
    }
    let (manifest, passed, failures) = run.finish()?;
    println!("manifest: {}", manifest.display());
    if !passed {
        eprintln!("{}", json!({ "status": "failed", "manifest": manifest, "failures": failures }));
    }
    Ok(passed)
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool, Failure> {
    let exec = exec_for(args.jobs)?;
    let opts = VerifyOptions { seed: args.seed, points: args.points, exec };
    opts.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let ids: Vec<u32> = if args.criteria.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { args.criteria.clone() };
    if let Some(bad) = ids.iter().find(|id| !CRITERIA.iter().any(|c| c.0 == **id)) {
        return Err(Failure::Usage(format!("unknown criterion {bad}")));
    }
    let report = verify(&ids, &opts).map_err(|e| Failure::Run(e.into()))?;
    for r in &report.results {
        println!("{}", r.line());
    }
    if let Some(p) = &args.json {
        std::fs::write(p, serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)? + "\n")
            .map_err(anyhow::Error::from)?;
    }
    if report.all_passed() {
        println!("verify: all {} criteria passed", report.results.len());
    } else {
        eprintln!("{}", json!({ "status": "failed", "failures": report.failures() }));
    }
    Ok(report.all_passed())
}

fn dispatch(cli: &Cli) -> Result<bool, Failure> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Groundstate(a) => {
            let out = tools::groundstate(&tools::GroundStateArgs {
                dim: a.dim,
                points: a.points,
                half_width: a.half_width,
                tol: a.tol,
                max_iter: a.max_iter,
                out: a.out.clone(),
            })?;
            print_json(&out);
            Ok(true)
        }
        Command::Decompose(a) => {
            let out = tools::decompose(&tools::DecomposeArgs {
                input: a.snapshot.clone(),
                max_profiles: a.max_profiles,
                mass_floor: a.mass_floor,
                radial: a.radial,
                gaussian_only: a.gaussian_only,
                out_dir: a.output_dir.clone(),
                exec: exec_for(a.jobs)?,
            })?;
            print_json(&out);
            Ok(true)
        }
        Command::Transform(a) => {
            let out = tools::transform(&tools::TransformArgs {
                input: a.snapshot.clone(),
                theta: a.theta,
                xi0: a.xi0.clone(),
                x0: a.x0.clone(),
                lambda: a.lambda,
                t0: a.t0,
                out: a.out.clone(),
            })?;
            print_json(&out);
            Ok(true)
        }
        Command::Norms(a) => {
            print_json(&tools::norms(&a.path, &a.p)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("mcnls: {msg}");
            eprintln!("{}", json!({ "status": "usage", "error": msg }));
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("{}", json!({ "status": "error", "error": format!("{e:#}") }));
            ExitCode::from(1)
        }
    }
}
