//! Complex Stiefel manifold `{X ∈ C^{n×p} : X†X = I}`.
//!
//! Tangent vectors at `X` are matrices `W` with `X†W + W†X = 0`, stored as
//! plain [`ComplexMatrix`] values alongside the base point they belong to.

use crate::error::{Error, Result};
use crate::matcore::{haar_unitary, solve, svd, ComplexMatrix};
use crate::optim::Manifold;
use num_complex::Complex64;
use rand::Rng;
use std::fmt;
use std::str::FromStr;

/// Metric on the tangent spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StiefelMetric {
    /// `2 Re tr(A† B)`.
    Euclidean,
    /// `2 Re tr(A† (I − ½ X X†) B)`.
    Canonical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Retraction {
    Cayley,
    Svd,
}

impl FromStr for StiefelMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Self::Euclidean),
            "canonical" => Ok(Self::Canonical),
            _ => Err(Error::InvalidArgument(format!("unknown metric `{s}`"))),
        }
    }
}

impl fmt::Display for StiefelMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Euclidean => "euclidean",
            Self::Canonical => "canonical",
        })
    }
}

impl FromStr for Retraction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cayley" => Ok(Self::Cayley),
            "svd" => Ok(Self::Svd),
            _ => Err(Error::InvalidArgument(format!("unknown retraction `{s}`"))),
        }
    }
}

impl fmt::Display for Retraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Cayley => "cayley",
            Self::Svd => "svd",
        })
    }
}

/// Point with orthonormal columns.
#[derive(Clone, Debug, PartialEq)]
pub struct StiefelPoint {
    x: ComplexMatrix,
}

impl StiefelPoint {
    /// Validates `‖X†X − I‖_F ≤ 1e-8`.
    pub fn new(x: ComplexMatrix) -> Result<Self> {
        if x.rows() < x.cols() {
            return Err(Error::InvalidDimension(format!(
                "{}x{} has more columns than rows",
                x.rows(),
                x.cols()
            )));
        }
        let residual = x.isometry_residual();
        if !(residual <= 1e-8) {
            return Err(Error::ConstraintViolation { residual });
        }
        Ok(Self { x })
    }

    /// Nearest point in Frobenius norm (polar factor).
    pub fn nearest(a: &ComplexMatrix) -> Result<Self> {
        let s = svd(a)?;
        let sigma_min = *s.singular_values.last().unwrap_or(&0.0);
        if sigma_min < 1e-12 {
            return Err(Error::RankDeficient { sigma_min });
        }
        Ok(Self { x: &s.u * &s.v.adjoint() })
    }

    pub(crate) fn trusted(x: ComplexMatrix) -> Self {
        Self { x }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.x
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.x
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    pub fn residual(&self) -> f64 {
        self.x.isometry_residual()
    }
}

/// Geometry of the Stiefel manifold: a metric plus a retraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stiefel {
    pub metric: StiefelMetric,
    pub retraction: Retraction,
}

impl Default for Stiefel {
    fn default() -> Self {
        Self { metric: StiefelMetric::Euclidean, retraction: Retraction::Svd }
    }
}

/// `‖X†W + W†X‖_F`, zero exactly for tangent vectors.
pub fn tangent_residual(x: &StiefelPoint, w: &ComplexMatrix) -> f64 {
    let a = &x.x.adjoint() * w;
    (&a + &a.adjoint()).frobenius_norm()
}

/// Orthogonal projection onto the tangent space, `Y − ½ X (X†Y + Y†X)`.
pub fn project_tangent(x: &StiefelPoint, y: &ComplexMatrix) -> ComplexMatrix {
    let a = &x.x.adjoint() * y;
    let sym = (&a + &a.adjoint()) * 0.5;
    y - &(&x.x * &sym)
}

/// Riemannian gradient from the Euclidean gradient `G = ∂f/∂X̄`.
pub fn riemannian_gradient(x: &StiefelPoint, g: &ComplexMatrix, metric: StiefelMetric) -> ComplexMatrix {
    match metric {
        StiefelMetric::Euclidean => project_tangent(x, g),
        StiefelMetric::Canonical => g - &(&x.x * &(&g.adjoint() * &x.x)),
    }
}

pub fn inner(x: &StiefelPoint, a: &ComplexMatrix, b: &ComplexMatrix, metric: StiefelMetric) -> f64 {
    match metric {
        StiefelMetric::Euclidean => 2.0 * a.dot(b).re,
        StiefelMetric::Canonical => {
            let xa = &x.x.adjoint() * a;
            let xb = &x.x.adjoint() * b;
            2.0 * (a.dot(b) - xa.dot(&xb) * 0.5).re
        }
    }
}

/// Moves from `X` along the tangent vector `W`.
pub fn retract(x: &StiefelPoint, w: &ComplexMatrix, kind: Retraction) -> Result<StiefelPoint> {
    match kind {
        Retraction::Svd => StiefelPoint::nearest(&(&x.x + w)),
        Retraction::Cayley => cayley(x, w),
    }
}

/// `(I + iH/2)⁻¹ (I − iH/2) X` with the Hermitian generator
/// `H = i(W X† − X W†) − (i/2)[X (X†W) X† − X (W†X) X†]`, for which
/// `−iHX = W` on tangent vectors.
fn cayley(x: &StiefelPoint, w: &ComplexMatrix) -> Result<StiefelPoint> {
    let xm = &x.x;
    let n = xm.rows();
    let xa = xm.adjoint();
    let i = Complex64::new(0.0, 1.0);
    let xw = &xa * w;
    let first = &(w * &xa) - &(xm * &w.adjoint());
    let second = &(xm * &(&xw * &xa)) - &(xm * &(&xw.adjoint() * &xa));
    let h = &(first * i) - &(second * (0.5 * i));
    let half = &h * (0.5 * i);
    let eye = ComplexMatrix::identity(n);
    let lhs = &eye + &half;
    let rhs = &(&eye - &half) * xm;
    let y = solve(&lhs, &rhs).ok_or(Error::CayleySolveFailure)?;
    Ok(StiefelPoint { x: y })
}

/// Transport of `W` to the point reached by retracting along `V`, by
/// projection onto the new tangent space.
pub fn vector_transport(
    x: &StiefelPoint,
    v: &ComplexMatrix,
    w: &ComplexMatrix,
    kind: Retraction,
) -> Result<ComplexMatrix> {
    let y = retract(x, v, kind)?;
    Ok(project_tangent(&y, w))
}

/// Haar-random point: the first `p` columns of a Haar unitary.
pub fn random_point<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> Result<StiefelPoint> {
    if p == 0 || p > n {
        return Err(Error::InvalidDimension(format!("Stiefel({n}, {p})")));
    }
    Ok(StiefelPoint { x: haar_unitary(n, rng).columns(0, p) })
}

/// Random tangent vector at `x` (projected Ginibre matrix).
pub fn random_tangent<R: Rng + ?Sized>(x: &StiefelPoint, rng: &mut R) -> ComplexMatrix {
    project_tangent(x, &ComplexMatrix::ginibre(x.n(), x.p(), rng))
}

impl Manifold for Stiefel {
    type Point = StiefelPoint;

    fn matrix<'a>(&self, x: &'a StiefelPoint) -> &'a ComplexMatrix {
        &x.x
    }

    fn riemannian_gradient(&self, x: &StiefelPoint, egrad: &ComplexMatrix) -> Result<ComplexMatrix> {
        Ok(riemannian_gradient(x, egrad, self.metric))
    }

    fn retract(&self, x: &StiefelPoint, w: &ComplexMatrix) -> Result<StiefelPoint> {
        retract(x, w, self.retraction)
    }

    fn transport(
        &self,
        _from: &StiefelPoint,
        _direction: &ComplexMatrix,
        to: &StiefelPoint,
        w: &ComplexMatrix,
    ) -> Result<ComplexMatrix> {
        Ok(project_tangent(to, w))
    }

    fn project(&self, x: &StiefelPoint, w: &ComplexMatrix) -> ComplexMatrix {
        project_tangent(x, w)
    }

    fn inner(&self, x: &StiefelPoint, a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        inner(x, a, b, self.metric)
    }

    fn constraint_residual(&self, x: &StiefelPoint) -> f64 {
        x.residual()
    }
}
