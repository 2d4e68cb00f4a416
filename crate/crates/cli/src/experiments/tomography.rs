use super::{optimize, problem_rng, sample_rng};
use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::output::{Artifacts, Summary};
use qriopt_core::autodiff::Graph;
use qriopt_core::optim::{Problem, TraceRecord};
use qriopt_core::optim::fmt_f64;
use qriopt_core::pdcone::{PdCone, PdPoint};
use qriopt_core::quantum::{
    log_likelihood, log_likelihood_node, random_density, sample_measurements, tetra_povm, trace_distance,
    MeasurementRecord,
};
use qriopt_core::ComplexMatrix;
use std::fmt::Write as _;

/// Negative log-likelihood per outcome; constant when nothing was measured.
struct Likelihood {
    graph: Option<Graph>,
    manifold: PdCone,
}

impl Problem for Likelihood {
    type M = PdCone;

    fn manifold(&self) -> &PdCone {
        &self.manifold
    }

    fn value_and_gradient(&self, points: &[PdPoint]) -> qriopt_core::Result<(f64, Vec<ComplexMatrix>)> {
        match &self.graph {
            Some(g) => {
                let r = g.gradient_ordered(&[points[0].matrix()])?;
                Ok((r.value, r.into_matrices()))
            }
            None => {
                let n = points[0].n();
                Ok((0.0, vec![ComplexMatrix::zeros(n, n)]))
            }
        }
    }
}

pub fn run_tomography(config: &ExperimentConfig) -> CliResult<Artifacts> {
    let povm = tetra_povm();
    let (record, rho_true) = match &config.record {
        Some(path) => (MeasurementRecord::from_csv(&std::fs::read_to_string(path)?)?, None),
        None => {
            let rho = random_density(1 << config.qubits, &mut problem_rng(config));
            let rec = sample_measurements(&rho, &povm, config.qubits, config.shots, &mut sample_rng(config))?;
            (rec, Some(rho))
        }
    };
    let nq = record.n_qubits;
    let d = 1usize << nq;
    let k = record.total();
    let graph = if k == 0 {
        None
    } else {
        let mut g = Graph::new();
        let s = g.var("s", d, d)?;
        let ll = log_likelihood_node(&mut g, s, &record, &povm, k as f64)?;
        let out = g.scale(ll, (-1.0).into());
        g.set_output(out)?;
        Some(g)
    };
    let problem = Likelihood { graph, manifold: PdCone { geometry: config.geometry } };

    let mut distances = Vec::new();
    let mut points = vec![PdPoint::identity(d)];
    let (trace, wall) = optimize(config, &problem, &mut points, |_, p| {
        if let Some(rho) = &rho_true {
            distances.push(trace_distance(rho, &p[0].normalized()).unwrap_or(f64::NAN));
        }
    })?;

    let target = match (&rho_true, k) {
        (_, 0) => Some(0.0),
        (Some(rho), _) => Some(-log_likelihood(rho, &record, &povm)? / k as f64),
        (None, _) => None,
    };
    let mut summary = Summary::new(config, &trace, target, wall).metric("shots", k);
    // the fit should be at least as likely as the state that generated the data
    summary.converged = summary.gap.is_some_and(|g| g <= 1e-12);
    let mut files = Vec::new();
    if let Some(last) = distances.last() {
        summary = summary.metric("trace_distance", *last);
        let mut csv = String::from("iter,trace_distance\n");
        for (TraceRecord { iter, .. }, dist) in trace.records.iter().zip(&distances) {
            let _ = writeln!(csv, "{iter},{}", fmt_f64(*dist));
        }
        files.push(("trace_distance.csv".to_string(), csv));
    }
    if config.record.is_none() {
        files.push(("measurements.csv".to_string(), record.to_csv()));
    }
    let mut out = Artifacts::new(trace, summary);
    out.files = files;
    Ok(out)
}
