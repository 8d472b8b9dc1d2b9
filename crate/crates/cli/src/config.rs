//! Scenario configuration: per-scenario defaults, a TOML file (or the
//! `config` block of an earlier manifest.json), and command-line overrides,
//! applied in that order.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use mcnls::propagator::{Nonlinearity, SolverConfig, StepPolicy};
use mcnls::{make_grid, Grid};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 20240611;
pub const OUTPUT_ENV: &str = "MCNLS_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Soliton,
    PcBlowup,
    Stability,
    ProfileDemo,
    FreqLocal,
    BilinearBench,
    NegRegularity,
    GalileanCheck,
}

impl Scenario {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }

    pub fn parse(name: &str) -> Result<Self, ConfigError> {
        Scenario::from_str(name, false).map_err(|_| {
            let known: Vec<String> = Scenario::value_variants().iter().map(|s| s.name()).collect();
            ConfigError(format!("unknown scenario '{name}' (expected one of {})", known.join(", ")))
        })
    }

    fn defaults(self) -> (GridParams, SolverParams) {
        let grid = |points, half_width| GridParams { dim: 1, points, half_width };
        let solver = |mu, dt, t_end, store_every| SolverParams {
            mu,
            dt,
            t_start: 0.0,
            t_end,
            store_every,
            policy: StepPolicy::Fixed,
        };
        use Nonlinearity::*;
        match self {
            Scenario::Soliton => (grid(512, 16.0), solver(Focusing, 1e-4, 1.0, 0.01)),
            Scenario::PcBlowup => (
                grid(1024, 16.0),
                SolverParams { policy: StepPolicy::Adaptive, ..solver(Focusing, 1e-3, 0.0, 0.01) },
            ),
            Scenario::Stability => (grid(256, 16.0), solver(Defocusing, 1e-3, 1.0, 0.05)),
            Scenario::ProfileDemo => (grid(2048, 16.0), solver(Linear, 1e-3, 0.0, 0.01)),
            Scenario::FreqLocal => (grid(512, 16.0), solver(Focusing, 1e-3, 1.0, 0.1)),
            Scenario::BilinearBench => (grid(1024, 16.0), solver(Linear, 1e-3, 0.0, 0.01)),
            Scenario::NegRegularity => (grid(512, 16.0), solver(Defocusing, 1e-3, 2.0, 0.02)),
            Scenario::GalileanCheck => (grid(512, 16.0), solver(Linear, 1e-3, 0.0, 0.01)),
        }
    }
}

impl Scenario {
    /// Dimensions the scenario is set up for.
    pub fn supports_dim(self, d: usize) -> bool {
        match self {
            Scenario::Soliton | Scenario::PcBlowup | Scenario::Stability | Scenario::FreqLocal => d == 1 || d == 2,
            _ => d == 1,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub dim: usize,
    pub points: usize,
    pub half_width: f64,
}

impl GridParams {
    pub fn build(&self) -> mcnls::Result<Grid> {
        make_grid(self.dim, self.points, self.half_width)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverParams {
    pub mu: Nonlinearity,
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub store_every: f64,
    pub policy: StepPolicy,
}

impl SolverParams {
    pub fn build(&self, dim: usize) -> SolverConfig {
        SolverConfig::new(self.mu, dim, self.dt).with_store_every(self.store_every).with_policy(self.policy)
    }
}

/// A fully resolved configuration. Everything except `output_dir` is
/// echoed into the manifest, so a manifest replays the same run wherever
/// it is written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub jobs: usize,
    pub grid: GridParams,
    pub solver: SolverParams,
    #[serde(skip)]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridOverrides {
    pub dim: Option<usize>,
    pub points: Option<usize>,
    pub half_width: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOverrides {
    pub mu: Option<Nonlinearity>,
    pub dt: Option<f64>,
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    pub store_every: Option<f64>,
    pub policy: Option<StepPolicy>,
}

/// One layer of settings; every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub scenario: Option<String>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub grid: GridOverrides,
    #[serde(default)]
    pub solver: SolverOverrides,
}

impl Overrides {
    /// Reads a TOML file, or the `config` block of a manifest when the
    /// file ends in `.json`.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let bad = |e: &dyn fmt::Display| ConfigError(format!("{}: {e}", path.display()));
        if path.extension().is_some_and(|e| e == "json") {
            let mut value: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(&e))?;
            let config = value.get_mut("config").map(serde_json::Value::take).unwrap_or(value);
            serde_json::from_value(config).map_err(|e| bad(&e))
        } else {
            toml::from_str(&text).map_err(|e| bad(&e))
        }
    }

    fn apply(&self, cfg: &mut ScenarioConfig) {
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src.clone() {
                    $dst = v;
                }
            };
        }
        set!(cfg.seed, self.seed);
        set!(cfg.jobs, self.jobs);
        set!(cfg.output_dir, self.output_dir);
        set!(cfg.grid.dim, self.grid.dim);
        set!(cfg.grid.points, self.grid.points);
        set!(cfg.grid.half_width, self.grid.half_width);
        set!(cfg.solver.mu, self.solver.mu);
        set!(cfg.solver.dt, self.solver.dt);
        set!(cfg.solver.t_start, self.solver.t_start);
        set!(cfg.solver.t_end, self.solver.t_end);
        set!(cfg.solver.store_every, self.solver.store_every);
        set!(cfg.solver.policy, self.solver.policy);
    }
}

fn default_output_dir(scenario: Scenario, env_root: Option<PathBuf>) -> PathBuf {
    env_root.unwrap_or_else(|| PathBuf::from("mcnls-runs")).join(scenario.name())
}

/// Resolves defaults < file < command line. `env_root` is the value of
/// MCNLS_OUTPUT_DIR, if set.
pub fn resolve(file: &Overrides, cli: &Overrides, env_root: Option<PathBuf>) -> Result<ScenarioConfig, ConfigError> {
    let name = cli
        .scenario
        .as_deref()
        .or(file.scenario.as_deref())
        .ok_or_else(|| ConfigError("no scenario given on the command line or in the config file".into()))?;
    // a bad name in the file is an error even when the command line overrides it
    if let Some(f) = &file.scenario {
        Scenario::parse(f)?;
    }
    let scenario = Scenario::parse(name)?;
    let (grid, solver) = scenario.defaults();
    let mut cfg = ScenarioConfig {
        scenario,
        seed: DEFAULT_SEED,
        jobs: 1,
        grid,
        solver,
        output_dir: default_output_dir(scenario, env_root),
    };
    file.apply(&mut cfg);
    cli.apply(&mut cfg);
    validate(&cfg)?;
    Ok(cfg)
}

pub fn validate(cfg: &ScenarioConfig) -> Result<(), ConfigError> {
    let err = |e: mcnls::Error| ConfigError(e.to_string());
    cfg.grid.build().map_err(err)?;
    cfg.solver.build(cfg.grid.dim).validate().map_err(err)?;
    if !cfg.scenario.supports_dim(cfg.grid.dim) {
        return Err(ConfigError(format!("scenario {} does not run in d = {}", cfg.scenario, cfg.grid.dim)));
    }
    if cfg.jobs == 0 {
        return Err(ConfigError("jobs must be at least 1".into()));
    }
    if !(cfg.solver.t_start.is_finite() && cfg.solver.t_end.is_finite()) {
        return Err(ConfigError("time span must be finite".into()));
    }
    Ok(())
}
