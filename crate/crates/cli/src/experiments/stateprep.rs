use super::{init_rng, optimize, problem_rng, stiefel};
use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::output::{Artifacts, Summary};
use qriopt_core::autodiff::Graph;
use qriopt_core::matcore::haar_unitary;
use qriopt_core::optim::Problem;
use qriopt_core::quantum::{apply_gate_node, cnot, random_state, zero_state};
use qriopt_core::stiefel::{Stiefel, StiefelPoint};
use qriopt_core::ComplexMatrix;

/// Parses CNOT layers such as `"12,34;23"`: layers separated by `;`, gates
/// by `,`, each gate a control digit then a target digit, qubits counted
/// from 1. Gates within a layer apply left to right.
pub fn parse_layout(layout: &str, qubits: usize) -> CliResult<Vec<Vec<[usize; 2]>>> {
    let bad = |why: String| CliError::Usage(format!("layout `{layout}`: {why}"));
    let mut layers = Vec::new();
    for layer in layout.split(';') {
        let mut gates = Vec::new();
        for gate in layer.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let digits: Vec<usize> = gate.chars().filter_map(|ch| ch.to_digit(10).map(|d| d as usize)).collect();
            if digits.len() != 2 || gate.chars().count() != 2 {
                return Err(bad(format!("gate `{gate}` is not two qubit digits")));
            }
            let (c, t) = (digits[0], digits[1]);
            if c == 0 || t == 0 || c > qubits || t > qubits || c == t {
                return Err(bad(format!("gate `{gate}` out of range for {qubits} qubits")));
            }
            gates.push([c - 1, t - 1]);
        }
        layers.push(gates);
    }
    Ok(layers)
}

/// `1 − |⟨target|ψ⟩|`, differentiated through `|⟨target|ψ⟩|²`.
struct StatePrep {
    graph: Graph,
    manifold: Stiefel,
}

impl Problem for StatePrep {
    type M = Stiefel;

    fn manifold(&self) -> &Stiefel {
        &self.manifold
    }

    fn value_and_gradient(&self, points: &[StiefelPoint]) -> qriopt_core::Result<(f64, Vec<ComplexMatrix>)> {
        let vals: Vec<&ComplexMatrix> = points.iter().map(|p| p.matrix()).collect();
        let r = self.graph.gradient_ordered(&vals)?;
        let overlap = r.value.max(0.0).sqrt();
        let chain = -0.5 / overlap.max(1e-150);
        Ok((1.0 - overlap, r.into_matrices().into_iter().map(|g| g * chain).collect()))
    }
}

pub fn run_stateprep(config: &ExperimentConfig) -> CliResult<Artifacts> {
    let nq = config.qubits;
    let layout = parse_layout(&config.layout, nq)?;
    let mut g = Graph::new();
    let mut psi = g.constant(zero_state(nq));
    let cx = g.constant(cnot());
    for m in 0..config.layers {
        if m > 0 {
            // CNOT layers repeat cyclically when the network is deeper than the layout
            for pair in &layout[(m - 1) % layout.len()] {
                psi = apply_gate_node(&mut g, psi, cx, pair, nq)?;
            }
        }
        for q in 0..nq {
            let u = g.var(&format!("u{m}_{q}"), 2, 2)?;
            psi = apply_gate_node(&mut g, psi, u, &[q], nq)?;
        }
    }
    let n_locals = config.layers * nq;
    let target = if config.zero_target {
        zero_state(nq)
    } else if config.planted {
        let mut rng = problem_rng(config);
        let locals: Vec<ComplexMatrix> = (0..n_locals).map(|_| haar_unitary(2, &mut rng)).collect();
        g.node_value(psi, &locals.iter().collect::<Vec<_>>())?
    } else {
        random_state(1 << nq, &mut problem_rng(config))
    };
    let t = g.constant(target.adjoint());
    let amp = g.matmul(t, psi)?;
    let q = g.abs_sq(amp);
    let out = g.sum(q);
    g.set_output(out)?;

    let mut rng = init_rng(config);
    let mut points = (0..n_locals)
        .map(|_| {
            let u = if config.identity_init { ComplexMatrix::identity(2) } else { haar_unitary(2, &mut rng) };
            StiefelPoint::new(u)
        })
        .collect::<qriopt_core::Result<Vec<_>>>()?;
    let problem = StatePrep { graph: g, manifold: stiefel(config) };
    let (trace, wall) = optimize(config, &problem, &mut points, |_, _| {})?;
    let mut summary = Summary::new(config, &trace, Some(0.0), wall);
    summary.converged = summary.final_objective <= 1e-6;
    let overlap = 1.0 - summary.final_objective;
    let summary = summary.metric("overlap", overlap);
    Ok(Artifacts::new(trace, summary))
}
