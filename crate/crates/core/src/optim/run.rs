use super::{Manifold, Optimizer};
use crate::autodiff::Graph;
use crate::error::{Error, Result};
use crate::matcore::ComplexMatrix;
use std::fmt::Write as _;
use std::time::Instant;

/// Objective over a list of manifold-valued variables.
pub trait Problem {
    type M: Manifold;

    fn manifold(&self) -> &Self::M;

    /// Objective value and Euclidean gradients `∂f/∂X̄`, one per variable.
    fn value_and_gradient(
        &self,
        points: &[<Self::M as Manifold>::Point],
    ) -> Result<(f64, Vec<ComplexMatrix>)>;
}

/// A graph objective whose variables, in declaration order, live on `manifold`.
pub struct GraphProblem<M> {
    pub graph: Graph,
    pub manifold: M,
}

impl<M: Manifold> Problem for GraphProblem<M> {
    type M = M;

    fn manifold(&self) -> &M {
        &self.manifold
    }

    fn value_and_gradient(&self, points: &[M::Point]) -> Result<(f64, Vec<ComplexMatrix>)> {
        let vals: Vec<&ComplexMatrix> = points.iter().map(|p| self.manifold.matrix(p)).collect();
        let r = self.graph.gradient_ordered(&vals)?;
        Ok((r.value, r.into_matrices()))
    }
}

/// Step size as a function of the iteration index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Schedule {
    Constant(f64),
    /// `η0 (η_final/η0)^{t/(T−1)}` over `T` iterations.
    Exponential { initial: f64, last: f64 },
}

impl Schedule {
    pub fn at(&self, t: usize, total: usize) -> f64 {
        match *self {
            Schedule::Constant(lr) => lr,
            Schedule::Exponential { initial, last } => {
                if total <= 1 {
                    initial
                } else {
                    initial * (last / initial).powf(t as f64 / (total - 1) as f64)
                }
            }
        }
    }

    pub fn initial(&self) -> f64 {
        match *self {
            Schedule::Constant(lr) => lr,
            Schedule::Exponential { initial, .. } => initial,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub iterations: usize,
    pub schedule: Schedule,
    /// Record wall-clock time per iteration; zero otherwise so traces are
    /// reproducible byte for byte.
    pub timing: bool,
}

/// One row of a trace: the state before update `iter` is applied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub objective: f64,
    pub grad_norm: f64,
    pub step_size: f64,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

pub const TRACE_HEADER: &str = "iter,objective,grad_norm,step_size,elapsed_ms";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl Trace {
    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }

    /// CSV with LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.iter,
                fmt_f64(r.objective),
                fmt_f64(r.grad_norm),
                fmt_f64(r.step_size),
                fmt_f64(r.elapsed_ms)
            );
        }
        out
    }
}

/// Runs `options.iterations` optimizer steps from `points`.
///
/// `observe` sees the iteration index and the points before each update.
pub fn run<P: Problem>(
    problem: &P,
    optimizer: &mut Optimizer,
    points: &mut [<P::M as Manifold>::Point],
    options: &RunOptions,
    mut observe: impl FnMut(usize, &[<P::M as Manifold>::Point]),
) -> Result<Trace> {
    let start = Instant::now();
    let mut trace = Trace { records: Vec::with_capacity(options.iterations) };
    for t in 0..options.iterations {
        observe(t, points);
        let (value, grads) = problem.value_and_gradient(points)?;
        if !value.is_finite() {
            return Err(Error::NonFinite);
        }
        let lr = options.schedule.at(t, options.iterations);
        let info = optimizer.step(problem.manifold(), points, &grads, lr)?;
        let elapsed_ms = if options.timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
        trace.records.push(TraceRecord {
            iter: t,
            objective: value,
            grad_norm: info.grad_norm,
            step_size: lr,
            elapsed_ms,
        });
    }
    Ok(trace)
}
