//! Output directory bookkeeping and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use mcnls::io::{snapshot_stats, write_field, write_trajectory};
use mcnls::propagator::Trajectory;
use mcnls::{Exec, Field};
use serde::Serialize;
use serde_json::Value;

use crate::config::ScenarioConfig;
use crate::plot;

/// One scenario-level assertion.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub versions: BTreeMap<&'static str, String>,
    pub scenario: String,
    pub seed: u64,
    pub config: &'a ScenarioConfig,
    pub passed: bool,
    pub failures: Vec<String>,
    pub checks: &'a [Check],
    pub metrics: &'a BTreeMap<String, Value>,
    pub artifacts: &'a [String],
}

pub fn versions() -> BTreeMap<&'static str, String> {
    BTreeMap::from([
        ("mcnls-core", mcnls::VERSION.to_string()),
        ("mcnls-cli", env!("CARGO_PKG_VERSION").to_string()),
        ("snapshot-format", "1".to_string()),
    ])
}

pub struct Run {
    pub config: ScenarioConfig,
    pub exec: Exec,
    pub dir: PathBuf,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, Value>,
    pub artifacts: Vec<String>,
}

impl Run {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        let dir = config.output_dir.clone();
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let exec = if config.jobs > 1 { Exec::Parallel } else { Exec::Sequential };
        Ok(Run { config, exec, dir, checks: vec![], metrics: BTreeMap::new(), artifacts: vec![] })
    }

    pub fn check_below(&mut self, name: &str, measured: f64, threshold: f64) {
        self.checks.push(Check { name: name.into(), passed: measured < threshold, measured, threshold });
    }

    pub fn check_above(&mut self, name: &str, measured: f64, threshold: f64) {
        self.checks.push(Check { name: name.into(), passed: measured >= threshold, measured, threshold });
    }

    pub fn check_true(&mut self, name: &str, ok: bool) {
        let v = if ok { 1.0 } else { 0.0 };
        self.checks.push(Check { name: name.into(), passed: ok, measured: v, threshold: 1.0 });
    }

    pub fn metric(&mut self, key: &str, value: impl Serialize) {
        self.metrics.insert(key.into(), serde_json::to_value(value).expect("serializable metric"));
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.artifacts.push(name.to_string());
        self.dir.join(name)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(&p, text).with_context(|| format!("writing {}", p.display()))
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        self.write_text(name, &text)
    }

    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv: {e}"))?;
        self.write_text(name, &String::from_utf8(bytes)?)
    }

    pub fn write_field(&mut self, name: &str, field: &Field) -> Result<()> {
        let p = self.path(name);
        Ok(write_field(&p, field)?)
    }

    /// Snapshots and trajectory.json under `name/`, the per-snapshot
    /// statistics as CSV and an |u| heatmap.
    pub fn write_trajectory(&mut self, name: &str, traj: &Trajectory, title: &str) -> Result<()> {
        write_trajectory(&self.dir.join(name), traj)?;
        self.artifacts.push(format!("{name}/trajectory.json"));
        let rows: Vec<Vec<String>> = snapshot_stats(traj)
            .iter()
            .map(|s| {
                let mut r = vec![num(s.t), num(s.mass), num(s.scale)];
                r.extend(s.x_center.iter().map(|v| num(*v)));
                r.extend(s.xi_center.iter().map(|v| num(*v)));
                r.push(num(s.peak));
                r
            })
            .collect();
        let d = traj.grid().dim();
        let mut header = vec!["t".to_string(), "mass".into(), "N".into()];
        header.extend((0..d).map(|a| format!("x_center_{a}")));
        header.extend((0..d).map(|a| format!("xi_center_{a}")));
        header.push("peak".into());
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        self.write_csv(&format!("{name}_timeseries.csv"), &header, &rows)?;
        self.heatmap(&format!("{name}_heatmap.svg"), title, &traj.times, &traj.fields)
    }

    pub fn heatmap(&mut self, name: &str, title: &str, times: &[f64], fields: &[Field]) -> Result<()> {
        let p = self.path(name);
        plot::heatmap(&p, title, times, fields)
    }

    pub fn chart(&mut self, name: &str, title: &str, x: &str, y: &str, series: &[plot::Series]) -> Result<()> {
        let p = self.path(name);
        plot::line_chart(&p, title, x, y, series)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect()
    }

    pub fn finish(mut self) -> Result<(PathBuf, bool, Vec<String>)> {
        self.artifacts.push("manifest.json".into());
        let manifest = Manifest {
            tool: "mcnls",
            versions: versions(),
            scenario: self.config.scenario.name(),
            seed: self.config.seed,
            config: &self.config,
            passed: self.passed(),
            failures: self.failures(),
            checks: &self.checks,
            metrics: &self.metrics,
            artifacts: &self.artifacts,
        };
        let path = self.dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok((path, manifest.passed, manifest.failures))
    }
}

/// Shortest round-trip text of a float.
pub fn num(v: f64) -> String {
    format!("{v}")
}
