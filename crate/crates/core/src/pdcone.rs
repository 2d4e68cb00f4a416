//! Cone of Hermitian positive-definite matrices under two pullback
//! geometries.
//!
//! Both geometries work through a global chart `F`: the matrix logarithm
//! (log-Euclidean) or the Cholesky factor (log-Cholesky). Ambient tangent
//! vectors are Hermitian matrices; chart tangents are Hermitian matrices
//! (log-Euclidean) or lower-triangular matrices with real diagonal
//! (log-Cholesky).

use crate::error::{Error, Result};
use crate::matcore::{cholesky_lower, hermitian_eig, lower_solve, ComplexMatrix, EigenDecomposition};
use crate::optim::Manifold;
use num_complex::Complex64;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PdGeometry {
    LogEuclidean,
    LogCholesky,
}

impl FromStr for PdGeometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log-euclidean" => Ok(Self::LogEuclidean),
            "log-cholesky" => Ok(Self::LogCholesky),
            _ => Err(Error::InvalidArgument(format!("unknown geometry `{s}`"))),
        }
    }
}

impl fmt::Display for PdGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::LogEuclidean => "log-euclidean",
            Self::LogCholesky => "log-cholesky",
        })
    }
}

/// Positive-definite matrix with lazily cached factorizations.
#[derive(Clone, Debug)]
pub struct PdPoint {
    s: ComplexMatrix,
    eig: OnceLock<EigenDecomposition>,
    chol: OnceLock<ComplexMatrix>,
}

impl PartialEq for PdPoint {
    fn eq(&self, other: &Self) -> bool {
        self.s == other.s
    }
}

impl PdPoint {
    /// Accepts `S` when Hermitian with smallest eigenvalue above
    /// `1e-12 · tr(S)/n`.
    pub fn new(s: ComplexMatrix) -> Result<Self> {
        let eig = hermitian_eig(&s)?;
        let n = s.rows() as f64;
        let floor = 1e-12 * s.trace().re / n;
        let min = eig.eigenvalues[0];
        if !(floor > 0.0 && min > floor) {
            return Err(Error::NotPositiveDefinite(format!("smallest eigenvalue {min:e}")));
        }
        let s = s.hermitian_part();
        Ok(Self { s, eig: OnceLock::from(eig), chol: OnceLock::new() })
    }

    pub fn identity(n: usize) -> Self {
        let eig = EigenDecomposition { eigenvalues: vec![1.0; n], eigenvectors: ComplexMatrix::identity(n) };
        Self {
            s: ComplexMatrix::identity(n),
            eig: OnceLock::from(eig),
            chol: OnceLock::from(ComplexMatrix::identity(n)),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.s
    }

    pub fn n(&self) -> usize {
        self.s.rows()
    }

    /// Eigen-decomposition of `S`.
    pub fn eig(&self) -> Result<&EigenDecomposition> {
        if let Some(e) = self.eig.get() {
            return Ok(e);
        }
        let e = hermitian_eig(&self.s)?;
        Ok(self.eig.get_or_init(|| e))
    }

    /// Lower Cholesky factor of `S`.
    pub fn cholesky(&self) -> Result<&ComplexMatrix> {
        if let Some(l) = self.chol.get() {
            return Ok(l);
        }
        let l = cholesky_lower(&self.s)?;
        Ok(self.chol.get_or_init(|| l))
    }

    /// `S / tr S`.
    pub fn normalized(&self) -> ComplexMatrix {
        &self.s * (1.0 / self.s.trace().re)
    }
}

/// Chart coordinates of `S`: `log S` or the Cholesky factor.
pub fn to_chart(s: &PdPoint, geometry: PdGeometry) -> Result<ComplexMatrix> {
    match geometry {
        PdGeometry::LogEuclidean => Ok(s.eig()?.apply_fn(f64::ln)),
        PdGeometry::LogCholesky => Ok(s.cholesky()?.clone()),
    }
}

/// Inverse chart: `exp(Ŝ)` or `Ŝ Ŝ†`.
pub fn from_chart(c: &ComplexMatrix, geometry: PdGeometry) -> Result<PdPoint> {
    match geometry {
        PdGeometry::LogEuclidean => {
            let e = hermitian_eig(c)?;
            Ok(point_from_log_eig(e))
        }
        PdGeometry::LogCholesky => {
            let n = c.rows();
            if !c.is_square() {
                return Err(Error::InvalidDimension(format!("{:?}", c.shape())));
            }
            for i in 0..n {
                let d = c[(i, i)];
                if !(d.re > 0.0) || d.im != 0.0 {
                    return Err(Error::NotPositiveDefinite(format!("chart diagonal {d}")));
                }
                for j in i + 1..n {
                    if c[(i, j)] != Complex64::new(0.0, 0.0) {
                        return Err(Error::InvalidArgument("chart factor is not lower triangular".into()));
                    }
                }
            }
            Ok(point_from_factor(c.clone()))
        }
    }
}

fn point_from_log_eig(e: EigenDecomposition) -> PdPoint {
    let eig = EigenDecomposition {
        eigenvalues: e.eigenvalues.iter().map(|l| l.exp()).collect(),
        eigenvectors: e.eigenvectors,
    };
    let s = eig.apply_fn(|x| x).hermitian_part();
    PdPoint { s, eig: OnceLock::from(eig), chol: OnceLock::new() }
}

fn point_from_factor(l: ComplexMatrix) -> PdPoint {
    let s = (&l * &l.adjoint()).hermitian_part();
    PdPoint { s, eig: OnceLock::new(), chol: OnceLock::from(l) }
}

/// Divided differences of `exp` at the log-eigenvalues:
/// `e^{(λi+λj)/2} sinhc((λi−λj)/2)`.
fn exp_divided_differences(s: &PdPoint) -> Result<(ComplexMatrix, Vec<f64>)> {
    let e = s.eig()?;
    let lam: Vec<f64> = e.eigenvalues.iter().map(|x| x.ln()).collect();
    let n = lam.len();
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let d = 0.5 * (lam[i] - lam[j]);
            let sinhc = if d.abs() < 1e-6 { 1.0 + d * d / 6.0 } else { d.sinh() / d };
            g[i * n + j] = (0.5 * (lam[i] + lam[j])).exp() * sinhc;
        }
    }
    Ok((e.eigenvectors.clone(), g))
}

fn hadamard_real(a: &ComplexMatrix, g: &[f64]) -> ComplexMatrix {
    let n = a.cols();
    ComplexMatrix::from_fn(a.rows(), n, |i, j| a[(i, j)] * g[i * n + j])
}

fn hadamard_real_inv(a: &ComplexMatrix, g: &[f64]) -> ComplexMatrix {
    let n = a.cols();
    ComplexMatrix::from_fn(a.rows(), n, |i, j| a[(i, j)] / g[i * n + j])
}

fn real_diagonal(l: &ComplexMatrix) -> Vec<f64> {
    (0..l.rows()).map(|i| l[(i, i)].re).collect()
}

/// Ambient tangent from a chart tangent (differential of the inverse chart).
pub fn diff_forward(s: &PdPoint, w_chart: &ComplexMatrix, geometry: PdGeometry) -> Result<ComplexMatrix> {
    match geometry {
        PdGeometry::LogEuclidean => {
            let (u, g) = exp_divided_differences(s)?;
            let inner = &(&u.adjoint() * w_chart) * &u;
            Ok((&(&u * &hadamard_real(&inner, &g)) * &u.adjoint()).hermitian_part())
        }
        PdGeometry::LogCholesky => {
            let l = s.cholesky()?;
            let a = l * &w_chart.adjoint();
            Ok(&a + &a.adjoint())
        }
    }
}

/// Chart tangent from an ambient tangent (differential of the chart).
pub fn diff_inverse(s: &PdPoint, w: &ComplexMatrix, geometry: PdGeometry) -> Result<ComplexMatrix> {
    match geometry {
        PdGeometry::LogEuclidean => {
            let (u, g) = exp_divided_differences(s)?;
            let inner = &(&u.adjoint() * w) * &u;
            Ok((&(&u * &hadamard_real_inv(&inner, &g)) * &u.adjoint()).hermitian_part())
        }
        PdGeometry::LogCholesky => {
            let l = s.cholesky()?;
            // L⁻¹ W L⁻† = L⁻¹ (L⁻¹ W)†  for Hermitian W
            let a = lower_solve(l, w)?;
            let b = lower_solve(l, &a.adjoint())?;
            Ok(l * &b.hermitian_part().lower_half())
        }
    }
}

/// Exponential map of the pullback metric at `S` applied to ambient `W`.
pub fn exp_map(s: &PdPoint, w: &ComplexMatrix, geometry: PdGeometry) -> Result<PdPoint> {
    let wc = diff_inverse(s, w, geometry)?;
    match geometry {
        PdGeometry::LogEuclidean => {
            let h = to_chart(s, geometry)? + wc;
            let e = hermitian_eig(&h.hermitian_part())?;
            Ok(point_from_log_eig(e))
        }
        PdGeometry::LogCholesky => {
            let l = s.cholesky()?;
            let n = l.rows();
            let mut next = &l.strict_lower() + &wc.strict_lower();
            for i in 0..n {
                let d = l[(i, i)].re;
                next[(i, i)] = Complex64::new(d * (wc[(i, i)].re / d).exp(), 0.0);
            }
            Ok(point_from_factor(next))
        }
    }
}

/// Parallel transport of ambient tangent `W` from `S` to `S'`.
pub fn transport(s: &PdPoint, to: &PdPoint, w: &ComplexMatrix, geometry: PdGeometry) -> Result<ComplexMatrix> {
    let wc = diff_inverse(s, w, geometry)?;
    match geometry {
        PdGeometry::LogEuclidean => diff_forward(to, &wc, geometry),
        PdGeometry::LogCholesky => {
            let (l, l2) = (s.cholesky()?, to.cholesky()?);
            let mut q = wc.strict_lower();
            for i in 0..l.rows() {
                q[(i, i)] = Complex64::new(l2[(i, i)].re / l[(i, i)].re * wc[(i, i)].re, 0.0);
            }
            diff_forward(to, &q, geometry)
        }
    }
}

/// Pullback metric of two ambient tangents.
pub fn inner(s: &PdPoint, a: &ComplexMatrix, b: &ComplexMatrix, geometry: PdGeometry) -> Result<f64> {
    let (ac, bc) = (diff_inverse(s, a, geometry)?, diff_inverse(s, b, geometry)?);
    Ok(chart_inner(s, &ac, &bc, geometry)?)
}

fn chart_inner(s: &PdPoint, a: &ComplexMatrix, b: &ComplexMatrix, geometry: PdGeometry) -> Result<f64> {
    match geometry {
        PdGeometry::LogEuclidean => Ok(2.0 * a.dot(b).re),
        PdGeometry::LogCholesky => {
            let d = real_diagonal(s.cholesky()?);
            let off = a.strict_lower().dot(&b.strict_lower()).re;
            let diag: f64 = (0..d.len()).map(|i| a[(i, i)].re * b[(i, i)].re / (d[i] * d[i])).sum();
            Ok(off + diag)
        }
    }
}

/// Riemannian gradient (ambient) from the Euclidean gradient `G = ∂f/∂S̄`
/// of an extension of `f` to all complex matrices.
pub fn riemannian_gradient(s: &PdPoint, g: &ComplexMatrix, geometry: PdGeometry) -> Result<ComplexMatrix> {
    match geometry {
        PdGeometry::LogEuclidean => {
            let (u, dd) = exp_divided_differences(s)?;
            let inner = &(&u.adjoint() * &g.hermitian_part()) * &u;
            let n = inner.rows();
            let core = ComplexMatrix::from_fn(n, n, |i, j| inner[(i, j)] * (dd[i * n + j] * dd[i * n + j]));
            Ok((&(&u * &core) * &u.adjoint()).hermitian_part())
        }
        PdGeometry::LogCholesky => {
            let l = s.cholesky()?;
            let gs = g + &g.adjoint();
            let m = &gs * l;
            let mut xc = m.strict_lower() * 2.0;
            for i in 0..l.rows() {
                let d = l[(i, i)].re;
                xc[(i, i)] = Complex64::new(2.0 * d * d * m[(i, i)].re, 0.0);
            }
            diff_forward(s, &xc, geometry)
        }
    }
}

/// The cone with a chosen geometry, as seen by the optimizers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PdCone {
    pub geometry: PdGeometry,
}

impl Manifold for PdCone {
    type Point = PdPoint;

    fn matrix<'a>(&self, x: &'a PdPoint) -> &'a ComplexMatrix {
        &x.s
    }

    fn riemannian_gradient(&self, x: &PdPoint, egrad: &ComplexMatrix) -> Result<ComplexMatrix> {
        riemannian_gradient(x, egrad, self.geometry)
    }

    fn retract(&self, x: &PdPoint, w: &ComplexMatrix) -> Result<PdPoint> {
        exp_map(x, w, self.geometry)
    }

    fn transport(&self, from: &PdPoint, _direction: &ComplexMatrix, to: &PdPoint, w: &ComplexMatrix) -> Result<ComplexMatrix> {
        transport(from, to, w, self.geometry)
    }

    fn project(&self, _x: &PdPoint, w: &ComplexMatrix) -> ComplexMatrix {
        w.hermitian_part()
    }

    fn inner(&self, x: &PdPoint, a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        inner(x, a, b, self.geometry).unwrap_or(f64::NAN)
    }

    fn constraint_residual(&self, x: &PdPoint) -> f64 {
        let herm = x.s.hermitian_residual() / x.s.frobenius_norm();
        let definite = match x.eig() {
            Ok(e) if e.eigenvalues[0] > 0.0 => 0.0,
            Ok(e) => -e.eigenvalues[0],
            Err(_) => f64::INFINITY,
        };
        herm + definite
    }
}
