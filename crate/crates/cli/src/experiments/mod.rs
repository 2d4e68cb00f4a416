//! One runner per experiment. Randomness comes from independent streams of
//! the configured seed: one for the problem instance, one for the starting
//! point and one for measurement sampling.

mod conventional;
mod entangle;
mod gatedecomp;
mod lowenergy;
mod mera;
mod pdground;
mod stateprep;
mod tomography;

pub use conventional::{run_conventional_demo, SIGN_CASES};
pub use entangle::run_entangle;
pub use gatedecomp::{network_unitary, run_gatedecomp};
pub use lowenergy::{gen_ill_conditioned_hamiltonian, run_lowenergy};
pub use mera::run_mera;
pub use pdground::{gen_spectrum_hamiltonian, run_pdground};
pub use stateprep::{parse_layout, run_stateprep};
pub use tomography::run_tomography;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::CliResult;
use crate::output::Artifacts;
use qriopt_core::optim::{self, Manifold, Optimizer, Problem, RunOptions, Trace};
use qriopt_core::rng::{self, Rng};
use qriopt_core::stiefel::Stiefel;
use std::time::Instant;

const PROBLEM_STREAM: u64 = 1;
const INIT_STREAM: u64 = 2;
const SAMPLE_STREAM: u64 = 3;

pub fn run_experiment(config: &ExperimentConfig) -> CliResult<Artifacts> {
    config.validate()?;
    match config.experiment {
        Experiment::Lowenergy => run_lowenergy(config),
        Experiment::Entangle => run_entangle(config),
        Experiment::Stateprep => run_stateprep(config),
        Experiment::Gatedecomp => run_gatedecomp(config),
        Experiment::Pdground => run_pdground(config),
        Experiment::Tomography => run_tomography(config),
        Experiment::Mera => run_mera(config),
        Experiment::Conventional => run_conventional_demo(config),
    }
}

fn problem_rng(config: &ExperimentConfig) -> Rng {
    rng::stream(config.seed, PROBLEM_STREAM)
}

fn init_rng(config: &ExperimentConfig) -> Rng {
    rng::stream(config.seed, INIT_STREAM)
}

fn sample_rng(config: &ExperimentConfig) -> Rng {
    rng::stream(config.seed, SAMPLE_STREAM)
}

fn stiefel(config: &ExperimentConfig) -> Stiefel {
    Stiefel { metric: config.metric, retraction: config.retraction }
}

/// Runs the configured optimizer; returns the trace and wall time in ms.
fn optimize<P: Problem>(
    config: &ExperimentConfig,
    problem: &P,
    points: &mut [<P::M as Manifold>::Point],
    observe: impl FnMut(usize, &[<P::M as Manifold>::Point]),
) -> CliResult<(Trace, f64)> {
    let start = Instant::now();
    let mut opt = Optimizer::new(config.optimizer);
    let options = RunOptions { iterations: config.iterations, schedule: config.schedule(), timing: config.timing };
    let trace = optim::run(problem, &mut opt, points, &options, observe)?;
    Ok((trace, start.elapsed().as_secs_f64() * 1e3))
}
