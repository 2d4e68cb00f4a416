use super::{init_rng, optimize, problem_rng, stiefel};
use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::output::{Artifacts, Summary};
use qriopt_core::autodiff::Graph;
use qriopt_core::matcore::haar_unitary;
use qriopt_core::optim::GraphProblem;
use qriopt_core::quantum::cnot;
use qriopt_core::stiefel::StiefelPoint;
use qriopt_core::ComplexMatrix;
use rand::Rng;

/// Local layers in the network.
const LOCAL_LAYERS: usize = 4;

/// `L₃ C L₂ C L₁ C L₀` with `L_k = a_k ⊗ b_k` and `C` the CNOT controlled by
/// the first qubit; `locals` is `[a₀, b₀, a₁, b₁, ...]`.
pub fn network_unitary(locals: &[ComplexMatrix]) -> ComplexMatrix {
    let c = cnot();
    let mut u = locals[0].kron(&locals[1]);
    for k in 1..LOCAL_LAYERS {
        u = locals[2 * k].kron(&locals[2 * k + 1]) * (&c * &u);
    }
    u
}

fn random_locals<R: Rng + ?Sized>(rng: &mut R) -> Vec<ComplexMatrix> {
    (0..2 * LOCAL_LAYERS).map(|_| haar_unitary(2, rng)).collect()
}

pub fn run_gatedecomp(config: &ExperimentConfig) -> CliResult<Artifacts> {
    let mut rng = problem_rng(config);
    let target = if config.planted { network_unitary(&random_locals(&mut rng)) } else { haar_unitary(4, &mut rng) };

    let mut g = Graph::new();
    let c = g.constant(cnot());
    let mut u = None;
    for k in 0..LOCAL_LAYERS {
        let a = g.var(&format!("a{k}"), 2, 2)?;
        let b = g.var(&format!("b{k}"), 2, 2)?;
        let l = g.kron(a, b);
        u = Some(match u {
            None => l,
            Some(prev) => {
                let cu = g.matmul(c, prev)?;
                g.matmul(l, cu)?
            }
        });
    }
    let t = g.constant(target);
    let diff = g.sub(t, u.expect("at least one layer"))?;
    let sq = g.abs_sq(diff);
    let out = g.sum(sq);
    g.set_output(out)?;

    let mut points = random_locals(&mut init_rng(config))
        .into_iter()
        .map(StiefelPoint::new)
        .collect::<qriopt_core::Result<Vec<_>>>()?;
    let problem = GraphProblem { graph: g, manifold: stiefel(config) };
    let (trace, wall) = optimize(config, &problem, &mut points, |_, _| {})?;
    let mut summary = Summary::new(config, &trace, Some(0.0), wall);
    summary.converged = summary.final_objective <= 1e-6;
    Ok(Artifacts::new(trace, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qriopt_core::rng::stream;

    #[test]
    fn network_is_unitary() {
        let u = network_unitary(&random_locals(&mut stream(1, 0)));
        assert!((u.adjoint() * &u - ComplexMatrix::identity(4)).max_abs() < 1e-12);
    }

    #[test]
    fn distance_is_nonnegative() {
        let mut c = ExperimentConfig::new(crate::Experiment::Gatedecomp);
        c.iterations = 30;
        let a = run_gatedecomp(&c).unwrap();
        assert!(a.trace.records.iter().all(|r| r.objective >= 0.0));
    }
}
