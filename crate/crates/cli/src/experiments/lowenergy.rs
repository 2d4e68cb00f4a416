use super::{init_rng, optimize, problem_rng, stiefel};
use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::output::{Artifacts, Summary};
use qriopt_core::autodiff::Graph;
use qriopt_core::matcore::haar_unitary;
use qriopt_core::optim::{run_conventional, GraphProblem};
use qriopt_core::stiefel::{random_point, Stiefel};
use qriopt_core::ComplexMatrix;
use rand::Rng;
use std::time::Instant;

/// `H = U†ΛU` with Haar `U` and `λ_i = e^{s_i} − max_j e^{s_j}`,
/// `s_i ~ U[−4, 0]`. Returns `H` and `λ` ascending.
pub fn gen_ill_conditioned_hamiltonian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (ComplexMatrix, Vec<f64>) {
    let e: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..0.0f64).exp()).collect();
    let top = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut lambda: Vec<f64> = e.iter().map(|x| x - top).collect();
    let u = haar_unitary(n, rng);
    let h = (u.adjoint() * ComplexMatrix::from_real_diagonal(&lambda) * &u).hermitian_part();
    lambda.sort_by(f64::total_cmp);
    (h, lambda)
}

/// `Re tr(V†HV)` over `V ∈ V_{n,p}`.
fn energy_graph(h: ComplexMatrix, p: usize) -> CliResult<Graph> {
    let n = h.rows();
    let mut g = Graph::new();
    let v = g.var("v", n, p)?;
    let hc = g.constant(h);
    let hv = g.matmul(hc, v)?;
    let va = g.adjoint(v);
    let vhv = g.matmul(va, hv)?;
    let tr = g.trace(vhv)?;
    let out = g.real(tr);
    g.set_output(out)?;
    Ok(g)
}

pub fn run_lowenergy(config: &ExperimentConfig) -> CliResult<Artifacts> {
    let (n, p) = (config.n, config.p);
    let (h, lambda) = gen_ill_conditioned_hamiltonian(n, &mut problem_rng(config));
    let target: f64 = lambda[..p].iter().sum();
    let problem = GraphProblem { graph: energy_graph(h, p)?, manifold: stiefel(config) };
    let start = vec![random_point(n, p, &mut init_rng(config))?];

    let mut points = start.clone();
    let (trace, wall) = optimize(config, &problem, &mut points, |_, _| {})?;
    let mut summary = Summary::new(config, &trace, Some(target), wall);
    let gap = summary.gap.unwrap_or(f64::NAN);
    summary.converged = gap <= 1e-4 * target.abs().max(1e-300);
    summary = summary.metric("relative_gap", gap / target.abs());

    let mut files = Vec::new();
    if config.baseline {
        let t0 = Instant::now();
        let mut points = start;
        let conv = GraphProblem { graph: problem.graph, manifold: Stiefel::default() };
        let btrace = run_conventional(&conv, &mut points, config.iterations, config.timing)?;
        let mut bsum = Summary::new(config, &btrace, Some(target), t0.elapsed().as_secs_f64() * 1e3);
        let bgap = bsum.gap.unwrap_or(f64::NAN);
        bsum.converged = bgap <= 1e-4 * target.abs();
        bsum.config["method"] = "conventional".into();
        summary = summary.metric("baseline_gap", bgap);
        let b = Artifacts::new(btrace, bsum);
        files.push(("baseline/trace.csv".to_string(), b.trace.to_csv()));
        files.push(("baseline/summary.json".to_string(), b.summary_json()));
    }
    let mut out = Artifacts::new(trace, summary);
    out.files = files;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qriopt_core::matcore::hermitian_eig;
    use qriopt_core::rng::stream;

    #[test]
    fn generated_spectrum() {
        let (h, lambda) = gen_ill_conditioned_hamiltonian(40, &mut stream(3, 0));
        assert!(lambda.iter().all(|&l| l <= 0.0));
        assert!(lambda.last().unwrap().abs() < 1e-15);
        let e = hermitian_eig(&h).unwrap();
        for (a, b) in e.eigenvalues.iter().zip(&lambda) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn square_case_is_optimal_immediately() {
        let mut c = ExperimentConfig::new(crate::Experiment::Lowenergy);
        c.n = 6;
        c.p = 6;
        c.iterations = 1;
        c.timing = false;
        let a = run_lowenergy(&c).unwrap();
        assert!(a.summary.gap.unwrap().abs() <= 1e-10);
    }
}
