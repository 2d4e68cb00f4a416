use crate::error::{CliError, CliResult};
use clap::{Parser, ValueEnum};
use qriopt_core::optim::{Method, Schedule};
use qriopt_core::pdcone::PdGeometry;
use qriopt_core::stiefel::{Retraction, StiefelMetric};
use serde::{Serialize, Serializer};
use std::fmt::Display;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// Lowest p-dimensional eigenspace of an ill-conditioned Hamiltonian.
    Lowenergy,
    /// Maximal Renyi-2 entanglement from a brick-wall circuit.
    Entangle,
    /// Target state from one-qubit unitaries and fixed CNOTs.
    Stateprep,
    /// Two-qubit gate from four local layers and three CNOTs.
    Gatedecomp,
    /// Ground state energy on the positive-definite cone.
    Pdground,
    /// Maximum likelihood tomography with the tetrahedral POVM.
    Tomography,
    /// Ternary MERA for the transverse-field Ising chain.
    Mera,
    /// Limit points of the linearized MERA update on a 2x1 problem.
    Conventional,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Lowenergy => "lowenergy",
            Experiment::Entangle => "entangle",
            Experiment::Stateprep => "stateprep",
            Experiment::Gatedecomp => "gatedecomp",
            Experiment::Pdground => "pdground",
            Experiment::Tomography => "tomography",
            Experiment::Mera => "mera",
            Experiment::Conventional => "conventional",
        }
    }

    /// Options, besides seed, iterations and timing, that the experiment reads.
    fn options(self) -> &'static [&'static str] {
        match self {
            Experiment::Lowenergy => &["optimizer", "lr", "lr_final", "metric", "retraction", "n", "p", "baseline"],
            Experiment::Entangle => &["optimizer", "lr", "lr_final", "metric", "retraction", "qubits", "layers", "idle_last"],
            Experiment::Stateprep => &[
                "optimizer", "lr", "lr_final", "metric", "retraction", "qubits", "layers", "layout", "identity_init", "planted",
                "zero_target",
            ],
            Experiment::Gatedecomp => &["optimizer", "lr", "lr_final", "metric", "retraction", "planted"],
            Experiment::Pdground => &["optimizer", "lr", "lr_final", "geometry", "n"],
            Experiment::Tomography => &["optimizer", "lr", "lr_final", "geometry", "qubits", "shots", "record"],
            Experiment::Mera => &[
                "optimizer", "lr", "lr_final", "metric", "retraction", "layers", "hx", "chi_max", "stretch", "gap_mode",
            ],
            Experiment::Conventional => &[],
        }
    }
}

/// Command line of `qriopt`.
#[derive(Clone, Debug, Parser)]
#[command(name = "qriopt", version, about = "Riemannian optimization experiments")]
pub struct Cli {
    pub experiment: Experiment,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub iters: Option<usize>,
    /// Initial step size.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Final step size of an exponentially decaying schedule.
    #[arg(long)]
    pub lr_final: Option<f64>,
    #[arg(long, value_name = "gd|momentum|adam|amsgrad")]
    pub optimizer: Option<Method>,
    #[arg(long, value_name = "euclidean|canonical")]
    pub metric: Option<StiefelMetric>,
    #[arg(long, value_name = "cayley|svd")]
    pub retraction: Option<Retraction>,
    #[arg(long, value_name = "log-euclidean|log-cholesky")]
    pub geometry: Option<PdGeometry>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Write zero elapsed times so reruns are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
    /// Matrix size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of columns of the isometry.
    #[arg(long)]
    pub p: Option<usize>,
    /// Circuit depth, or MERA layers (N = 2*3^layers sites).
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub qubits: Option<usize>,
    /// Transverse field.
    #[arg(long)]
    pub hx: Option<f64>,
    #[arg(long)]
    pub chi_max: Option<usize>,
    /// Number of measurement outcomes K.
    #[arg(long)]
    pub shots: Option<u64>,
    /// CNOT layers between one-qubit layers, e.g. "12,34;23;12,34".
    #[arg(long)]
    pub layout: Option<String>,
    /// Paper-scale MERA (486 sites, 10000 iterations).
    #[arg(long)]
    pub stretch: bool,
    /// Also run the conventional SVD-update optimizer.
    #[arg(long)]
    pub baseline: bool,
    /// Minimize the trace of the top Hamiltonian and report its spectrum.
    #[arg(long)]
    pub gap_mode: bool,
    /// Odd entangling layers leave the last qubit idle rather than the first.
    #[arg(long)]
    pub idle_last: bool,
    /// Use a target produced by the network itself.
    #[arg(long)]
    pub planted: bool,
    /// Start from identity gates instead of Haar-random ones.
    #[arg(long)]
    pub identity_init: bool,
    /// Use |0...0> as the target state.
    #[arg(long)]
    pub zero_target: bool,
    /// MeasurementRecord CSV to fit instead of sampling.
    #[arg(long)]
    pub record: Option<PathBuf>,
}

fn display<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Everything a runner needs, with experiment defaults filled in.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub iterations: usize,
    #[serde(serialize_with = "display")]
    pub optimizer: Method,
    pub lr: f64,
    pub lr_final: Option<f64>,
    #[serde(serialize_with = "display")]
    pub metric: StiefelMetric,
    #[serde(serialize_with = "display")]
    pub retraction: Retraction,
    #[serde(serialize_with = "display")]
    pub geometry: PdGeometry,
    pub n: usize,
    pub p: usize,
    pub layers: usize,
    pub qubits: usize,
    pub hx: f64,
    pub chi_max: usize,
    pub shots: u64,
    pub layout: String,
    pub stretch: bool,
    pub baseline: bool,
    pub gap_mode: bool,
    pub idle_last: bool,
    pub planted: bool,
    pub identity_init: bool,
    pub zero_target: bool,
    pub record: Option<PathBuf>,
    pub timing: bool,
}

impl ExperimentConfig {
    /// Defaults of `experiment` with seed 0.
    pub fn new(experiment: Experiment) -> Self {
        let mut c = Self {
            experiment,
            seed: 0,
            iterations: 1000,
            optimizer: Method::ADAM,
            lr: 0.1,
            lr_final: None,
            metric: StiefelMetric::Euclidean,
            retraction: Retraction::Svd,
            geometry: PdGeometry::LogEuclidean,
            n: 100,
            p: 30,
            layers: 6,
            qubits: 11,
            hx: 1.0,
            chi_max: 4,
            shots: 500_000,
            layout: "12,23,34;12,23,34;12,23,34".into(),
            stretch: false,
            baseline: false,
            gap_mode: false,
            idle_last: false,
            planted: false,
            identity_init: false,
            zero_target: false,
            record: None,
            timing: true,
        };
        match experiment {
            Experiment::Lowenergy => {
                c.iterations = 500;
                c.lr = 0.3;
            }
            Experiment::Entangle => {
                c.optimizer = Method::AMSGRAD;
            }
            Experiment::Stateprep => {
                c.iterations = 2000;
                c.lr = 0.05;
                c.qubits = 4;
                c.layers = 4;
            }
            Experiment::Gatedecomp => {
                c.iterations = 2000;
                c.optimizer = Method::AMSGRAD;
                c.lr = 0.2;
            }
            Experiment::Pdground => {
                c.iterations = 5000;
                c.lr = 0.5;
            }
            Experiment::Tomography => {
                c.iterations = 1000;
                c.lr = 0.3;
                c.geometry = PdGeometry::LogCholesky;
                c.qubits = 2;
            }
            Experiment::Mera => {
                c.iterations = 3000;
                c.lr = 0.5;
                c.lr_final = Some(0.03);
                c.layers = 3;
            }
            Experiment::Conventional => {
                c.iterations = 100;
                c.optimizer = Method::Gd;
                c.lr = 0.0;
            }
        }
        c
    }

    /// Applies command line overrides, rejecting options the experiment
    /// does not read.
    pub fn from_cli(cli: &Cli) -> CliResult<Self> {
        let exp = cli.experiment;
        let mut c = Self::new(exp);
        let given: [(&str, bool); 22] = [
            ("optimizer", cli.optimizer.is_some()),
            ("lr", cli.lr.is_some()),
            ("lr_final", cli.lr_final.is_some()),
            ("metric", cli.metric.is_some()),
            ("retraction", cli.retraction.is_some()),
            ("geometry", cli.geometry.is_some()),
            ("n", cli.n.is_some()),
            ("p", cli.p.is_some()),
            ("layers", cli.layers.is_some()),
            ("qubits", cli.qubits.is_some()),
            ("hx", cli.hx.is_some()),
            ("chi_max", cli.chi_max.is_some()),
            ("shots", cli.shots.is_some()),
            ("layout", cli.layout.is_some()),
            ("stretch", cli.stretch),
            ("baseline", cli.baseline),
            ("gap_mode", cli.gap_mode),
            ("idle_last", cli.idle_last),
            ("planted", cli.planted),
            ("identity_init", cli.identity_init),
            ("zero_target", cli.zero_target),
            ("record", cli.record.is_some()),
        ];
        for (name, set) in given {
            if set && !exp.options().contains(&name) {
                return Err(CliError::Usage(format!(
                    "--{} does not apply to {}",
                    name.replace('_', "-"),
                    exp.name()
                )));
            }
        }
        if cli.stretch {
            c.layers = 5;
            c.iterations = 10_000;
        }
        c.seed = cli.seed.unwrap_or(c.seed);
        c.iterations = cli.iters.unwrap_or(c.iterations);
        c.optimizer = cli.optimizer.unwrap_or(c.optimizer);
        c.lr = cli.lr.unwrap_or(c.lr);
        c.lr_final = cli.lr_final.or(c.lr_final);
        c.metric = cli.metric.unwrap_or(c.metric);
        c.retraction = cli.retraction.unwrap_or(c.retraction);
        c.geometry = cli.geometry.unwrap_or(c.geometry);
        c.n = cli.n.unwrap_or(c.n);
        c.p = cli.p.unwrap_or(c.p);
        c.layers = cli.layers.unwrap_or(c.layers);
        c.qubits = cli.qubits.unwrap_or(c.qubits);
        c.hx = cli.hx.unwrap_or(c.hx);
        c.chi_max = cli.chi_max.unwrap_or(c.chi_max);
        c.shots = cli.shots.unwrap_or(c.shots);
        if let Some(l) = &cli.layout {
            c.layout = l.clone();
        }
        c.baseline = cli.baseline;
        c.gap_mode = cli.gap_mode;
        c.idle_last = cli.idle_last;
        c.planted = cli.planted;
        c.identity_init = cli.identity_init;
        c.zero_target = cli.zero_target;
        c.record = cli.record.clone();
        c.timing = !cli.no_timing;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Usage(m));
        if self.iterations == 0 {
            return bad("--iters must be at least 1".into());
        }
        let uses_lr = self.experiment.options().contains(&"lr");
        if uses_lr && !(self.lr.is_finite() && self.lr > 0.0) {
            return bad(format!("--lr must be positive, got {}", self.lr));
        }
        if let Some(f) = self.lr_final {
            if !(f.is_finite() && f > 0.0) {
                return bad(format!("--lr-final must be positive, got {f}"));
            }
        }
        match self.experiment {
            Experiment::Lowenergy if self.n < 2 || self.p == 0 || self.p > self.n => {
                bad(format!("need 1 <= p <= n and n >= 2, got n={} p={}", self.n, self.p))
            }
            Experiment::Pdground if self.n < 2 => bad(format!("need n >= 2, got {}", self.n)),
            Experiment::Entangle if self.qubits < 3 || self.layers == 0 => {
                bad("entangle needs at least 3 qubits and 1 layer".into())
            }
            Experiment::Stateprep if self.qubits == 0 || self.qubits > 12 || self.layers == 0 => {
                bad("stateprep needs 1 to 12 qubits and at least 1 layer".into())
            }
            Experiment::Tomography if self.record.is_none() && !(1..=4).contains(&self.qubits) => {
                bad(format!("tomography supports 1 to 4 qubits, got {}", self.qubits))
            }
            Experiment::Mera if self.layers == 0 || self.chi_max < 2 => {
                bad("mera needs at least one layer and chi-max >= 2".into())
            }
            _ => Ok(()),
        }
    }

    pub fn schedule(&self) -> Schedule {
        match self.lr_final {
            Some(last) => Schedule::Exponential { initial: self.lr, last },
            None => Schedule::Constant(self.lr),
        }
    }

    /// Config echo for the summary: only the options the experiment reads.
    pub fn echo(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let serde_json::Value::Object(map) = &mut v {
            let keep = self.experiment.options();
            map.retain(|k, _| matches!(k.as_str(), "experiment" | "seed" | "iterations" | "timing") || keep.contains(&k.as_str()));
        }
        v
    }
}
