use super::{Problem, Trace, TraceRecord};
use crate::error::{Error, Result};
use crate::matcore::{svd, ComplexMatrix};
use crate::stiefel::{self, Stiefel, StiefelMetric, StiefelPoint};
use std::time::Instant;

/// Update of the linearized-energy scheme used for MERA: with the SVD
/// `G = W Λ U†` of the Euclidean gradient the new point is `−W U†`, the
/// isometry minimizing `Re tr(ω† G)`.
pub fn mera_linear_step(g: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !g.is_finite() {
        return Err(Error::NonFiniteGradient);
    }
    let s = svd(g)?;
    let sigma_min = s.singular_values.last().copied().unwrap_or(0.0);
    if sigma_min < 1e-14 {
        return Err(Error::RankDeficient { sigma_min });
    }
    Ok(-(&s.u * &s.v.adjoint()))
}

/// Repeats [`mera_linear_step`] on every variable. Step sizes are not used
/// and are recorded as zero.
pub fn run_conventional<P: Problem<M = Stiefel>>(
    problem: &P,
    points: &mut [StiefelPoint],
    iterations: usize,
    timing: bool,
) -> Result<Trace> {
    let start = Instant::now();
    let mut trace = Trace { records: Vec::with_capacity(iterations) };
    for t in 0..iterations {
        let (value, grads) = problem.value_and_gradient(points)?;
        let mut norm_sq = 0.0;
        for (x, g) in points.iter_mut().zip(&grads) {
            let rg = stiefel::riemannian_gradient(x, g, StiefelMetric::Euclidean);
            norm_sq += stiefel::inner(x, &rg, &rg, StiefelMetric::Euclidean);
            // a rank-deficient gradient has no unique minimizer; stay put
            match mera_linear_step(g) {
                Ok(next) => *x = StiefelPoint::trusted(next),
                Err(Error::RankDeficient { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        trace.records.push(TraceRecord {
            iter: t,
            objective: value,
            grad_norm: norm_sq.sqrt(),
            step_size: 0.0,
            elapsed_ms: if timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 },
        });
    }
    Ok(trace)
}
