//! First-order Riemannian optimizers and the run loop.

mod conventional;
mod methods;
mod run;

pub use conventional::{mera_linear_step, run_conventional};
pub use methods::{Method, Optimizer, StepInfo};
pub use run::{fmt_f64, run, GraphProblem, Problem, RunOptions, Schedule, Trace, TraceRecord, TRACE_HEADER};

use crate::error::Result;
use crate::matcore::ComplexMatrix;

/// Geometry consumed by the optimizers. Tangent vectors are ambient
/// matrices attached to the point they were computed at.
pub trait Manifold {
    type Point: Clone;

    /// Ambient matrix of a point.
    fn matrix<'a>(&self, x: &'a Self::Point) -> &'a ComplexMatrix;

    /// Riemannian gradient from the Euclidean gradient `∂f/∂X̄`.
    fn riemannian_gradient(&self, x: &Self::Point, egrad: &ComplexMatrix) -> Result<ComplexMatrix>;

    fn retract(&self, x: &Self::Point, w: &ComplexMatrix) -> Result<Self::Point>;

    /// Moves tangent `w` at `from` to `to`, where `to` was reached by
    /// retracting along `direction`.
    fn transport(
        &self,
        from: &Self::Point,
        direction: &ComplexMatrix,
        to: &Self::Point,
        w: &ComplexMatrix,
    ) -> Result<ComplexMatrix>;

    /// Projection of an ambient matrix onto the tangent space.
    fn project(&self, x: &Self::Point, w: &ComplexMatrix) -> ComplexMatrix;

    fn inner(&self, x: &Self::Point, a: &ComplexMatrix, b: &ComplexMatrix) -> f64;

    /// Distance of a point from the constraint set.
    fn constraint_residual(&self, x: &Self::Point) -> f64;
}
