use super::{init_rng, problem_rng};
use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::output::{Artifacts, Summary};
use qriopt_core::autodiff::Graph;
use qriopt_core::matcore::haar_unitary;
use qriopt_core::optim::{fmt_f64, run_conventional, GraphProblem};
use qriopt_core::stiefel::{random_point, Stiefel, StiefelPoint};
use qriopt_core::ComplexMatrix;
use std::fmt::Write as _;
use std::time::Instant;

/// Eigenvalue pairs of the 2x2 Hamiltonians.
pub const SIGN_CASES: [(f64, f64); 4] = [(-1.0, -2.0), (-1.0, 2.0), (1.0, 2.0), (1.0, -2.0)];

/// Minimizes `Σ_k ω_k† H_k ω_k` over four independent points of `V_{2,1}`,
/// one per sign case, with the linearized update. Each `H_k` has its
/// eigenvalue pair in a random eigenbasis.
pub fn run_conventional_demo(config: &ExperimentConfig) -> CliResult<Artifacts> {
    let t0 = Instant::now();
    let mut rng = problem_rng(config);
    let mut g = Graph::new();
    let mut bases = Vec::new();
    let mut total = None;
    for (k, &(a, b)) in SIGN_CASES.iter().enumerate() {
        let u = haar_unitary(2, &mut rng);
        let h = (&u * ComplexMatrix::from_real_diagonal(&[a, b]) * u.adjoint()).hermitian_part();
        bases.push(u);
        let w = g.var(&format!("w{k}"), 2, 1)?;
        let hc = g.constant(h);
        let hw = g.matmul(hc, w)?;
        let wa = g.adjoint(w);
        let e = g.matmul(wa, hw)?;
        total = Some(match total {
            None => e,
            Some(t) => g.add(t, e)?,
        });
    }
    let out = g.real(total.expect("four cases"));
    g.set_output(out)?;

    let mut init = init_rng(config);
    let mut points = (0..SIGN_CASES.len())
        .map(|_| random_point(2, 1, &mut init))
        .collect::<qriopt_core::Result<Vec<StiefelPoint>>>()?;
    let problem = GraphProblem { graph: g, manifold: Stiefel::default() };
    let trace = run_conventional(&problem, &mut points, config.iterations, config.timing)?;

    let mut csv = String::from("lambda1,lambda2,alignment_max_abs,alignment_minimizer\n");
    let mut worst: f64 = 1.0;
    let mut found = 0usize;
    for (((a, b), u), w) in SIGN_CASES.iter().zip(&bases).zip(&points) {
        let column = |j: usize| u.columns(j, 1);
        let max_abs = if a.abs() > b.abs() { 0 } else { 1 };
        let minimizer = if a < b { 0 } else { 1 };
        let align_max = column(max_abs).dot(w.matrix()).norm();
        let align_min = column(minimizer).dot(w.matrix()).norm();
        worst = worst.min(align_max);
        if align_min >= 1.0 - 1e-6 {
            found += 1;
        }
        let _ = writeln!(csv, "{},{},{},{}", fmt_f64(*a), fmt_f64(*b), fmt_f64(align_max), fmt_f64(align_min));
    }
    let target: f64 = SIGN_CASES.iter().map(|&(a, b)| a.min(b)).sum();
    let mut summary = Summary::new(config, &trace, Some(target), t0.elapsed().as_secs_f64() * 1e3)
        .metric("min_alignment_max_abs", worst)
        .metric("cases_at_minimum", found);
    summary.converged = worst >= 1.0 - 1e-6;
    let mut out = Artifacts::new(trace, summary);
    out.files.push(("limits.csv".into(), csv));
    Ok(out)
}
