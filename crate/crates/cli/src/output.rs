use crate::config::ExperimentConfig;
use crate::error::CliResult;
use qriopt_core::optim::Trace;
use qriopt_core::rng::RNG_NAME;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::fs;
use std::path::Path;

/// Contents of `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub seed: u64,
    pub rng: String,
    pub config: Value,
    pub final_objective: f64,
    pub target: Option<f64>,
    pub gap: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub wall_ms: f64,
    /// Experiment-specific figures of merit.
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub metrics: Map<String, Value>,
}

impl Summary {
    /// Summary of `trace`; the final objective is the last row's.
    pub fn new(config: &ExperimentConfig, trace: &Trace, target: Option<f64>, wall_ms: f64) -> Self {
        let final_objective = trace.last().map_or(f64::NAN, |r| r.objective);
        Self {
            experiment: config.experiment.name().into(),
            seed: config.seed,
            rng: RNG_NAME.into(),
            config: config.echo(),
            final_objective,
            target,
            gap: target.map(|t| final_objective - t),
            converged: false,
            iterations: trace.records.len(),
            wall_ms: if config.timing { wall_ms } else { 0.0 },
            metrics: Map::new(),
        }
    }

    pub fn metric(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metrics.insert(key.into(), value.into());
        self
    }

    pub fn get_metric(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).and_then(Value::as_f64)
    }
}

/// Everything a run writes.
#[derive(Clone, Debug)]
pub struct Artifacts {
    pub trace: Trace,
    pub summary: Summary,
    /// Extra files as (path relative to the output directory, contents).
    pub files: Vec<(String, String)>,
}

impl Artifacts {
    pub fn new(trace: Trace, summary: Summary) -> Self {
        Self { trace, summary, files: Vec::new() }
    }

    pub fn summary_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.summary).expect("summary serializes");
        s.push('\n');
        s
    }
}

/// Writes `trace.csv`, `summary.json` and the extra files under `dir`.
pub fn write_artifacts(dir: &Path, artifacts: &Artifacts) -> CliResult<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("trace.csv"), artifacts.trace.to_csv())?;
    fs::write(dir.join("summary.json"), artifacts.summary_json())?;
    for (name, contents) in &artifacts.files {
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, contents)?;
    }
    Ok(())
}
