use super::{optimize, problem_rng};
use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::output::{Artifacts, Summary};
use qriopt_core::autodiff::Graph;
use qriopt_core::matcore::haar_unitary;
use qriopt_core::optim::GraphProblem;
use qriopt_core::pdcone::{PdCone, PdPoint};
use qriopt_core::ComplexMatrix;
use rand::Rng;

/// `H = UΛU†` with Haar `U` and eigenvalues uniform on [0, 1]; returns the
/// eigenvalues ascending.
pub fn gen_spectrum_hamiltonian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (ComplexMatrix, Vec<f64>) {
    let mut lambda: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let u = haar_unitary(n, rng);
    let h = (&u * ComplexMatrix::from_real_diagonal(&lambda) * u.adjoint()).hermitian_part();
    lambda.sort_by(f64::total_cmp);
    (h, lambda)
}

/// `Re tr(HS) / Re tr(S)`.
pub(crate) fn rayleigh_graph(h: ComplexMatrix) -> CliResult<Graph> {
    let n = h.rows();
    let mut g = Graph::new();
    let s = g.var("s", n, n)?;
    let hc = g.constant(h);
    let hs = g.matmul(hc, s)?;
    let num = g.trace(hs)?;
    let den = g.trace(s)?;
    let e = g.div_scalar(num, den)?;
    let out = g.real(e);
    g.set_output(out)?;
    Ok(g)
}

pub fn run_pdground(config: &ExperimentConfig) -> CliResult<Artifacts> {
    let (h, lambda) = gen_spectrum_hamiltonian(config.n, &mut problem_rng(config));
    let e_g = lambda[0];
    let problem = GraphProblem { graph: rayleigh_graph(h)?, manifold: PdCone { geometry: config.geometry } };
    let mut points = vec![PdPoint::identity(config.n)];
    let (trace, wall) = optimize(config, &problem, &mut points, |_, _| {})?;
    let mut summary = Summary::new(config, &trace, Some(e_g), wall);
    summary.converged = summary.gap.is_some_and(|g| g <= 1e-5);
    Ok(Artifacts::new(trace, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qriopt_core::pdcone::PdGeometry;

    #[test]
    fn identity_hamiltonian_is_flat() {
        let problem = GraphProblem {
            graph: rayleigh_graph(ComplexMatrix::identity(5)).unwrap(),
            manifold: PdCone { geometry: PdGeometry::LogEuclidean },
        };
        let s = PdPoint::new(qriopt_core::quantum::random_density(5, &mut qriopt_core::rng::stream(2, 0))).unwrap();
        use qriopt_core::optim::Problem;
        let (v, _) = problem.value_and_gradient(&[s]).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn variational_bound_holds() {
        let mut c = ExperimentConfig::new(crate::Experiment::Pdground);
        c.n = 8;
        c.iterations = 200;
        let a = run_pdground(&c).unwrap();
        let e_g = a.summary.target.unwrap();
        assert!(a.trace.records.iter().all(|r| r.objective - e_g >= -1e-12));
    }
}
