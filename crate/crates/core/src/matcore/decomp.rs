use super::{ComplexMatrix, ONE, ZERO};
use crate::error::{shape_err, Error, Result};
use nalgebra::{SymmetricEigen, SVD};
use num_complex::Complex64;
use rand::Rng;

const MAX_SWEEPS: usize = 10_000;

/// Eigen-decomposition `H = U diag(λ) U†` with eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// `U diag(f(λ)) U†`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let u = &self.eigenvectors;
        let n = u.rows();
        let scaled = ComplexMatrix::from_fn(n, n, |i, j| u[(i, j)] * f(self.eigenvalues[j]));
        &scaled * &u.adjoint()
    }
}

/// Thin SVD `A = U diag(σ) V†` with singular values descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

/// Eigen-decomposition of a Hermitian matrix.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<EigenDecomposition> {
    h.ensure_hermitian()?;
    let n = h.rows();
    let sym = h.hermitian_part().to_nalgebra();
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, MAX_SWEEPS)
        .ok_or(Error::ConvergenceFailure("hermitian_eig"))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

/// Thin singular value decomposition.
pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    let m = a.to_nalgebra();
    let dec = SVD::try_new(m, true, true, f64::EPSILON, MAX_SWEEPS)
        .ok_or(Error::ConvergenceFailure("svd"))?;
    let u = dec.u.as_ref().ok_or(Error::ConvergenceFailure("svd"))?;
    let vt = dec.v_t.as_ref().ok_or(Error::ConvergenceFailure("svd"))?;
    let k = dec.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| dec.singular_values[y].total_cmp(&dec.singular_values[x]));
    let singular_values = order.iter().map(|&j| dec.singular_values[j]).collect();
    let u = ComplexMatrix::from_fn(a.rows(), k, |i, j| u[(i, order[j])]);
    let v = ComplexMatrix::from_fn(a.cols(), k, |i, j| vt[(order[j], i)].conj());
    Ok(Svd { u, singular_values, v })
}

/// Thin QR factorization `A = QR` of a tall matrix.
pub fn qr_thin(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let qr = a.to_nalgebra().qr();
    (ComplexMatrix::from_nalgebra(&qr.q()), ComplexMatrix::from_nalgebra(&qr.r()))
}

/// Solves `A X = B` for square `A`.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Option<ComplexMatrix> {
    if !a.is_square() || a.rows() != b.rows() {
        return None;
    }
    let x = a.to_nalgebra().lu().solve(&b.to_nalgebra())?;
    let x = ComplexMatrix::from_nalgebra(&x);
    x.is_finite().then_some(x)
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let z = ComplexMatrix::ginibre(n, n, rng);
    let (mut q, r) = qr_thin(&z);
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Lower Cholesky factor `S = L L†` with real positive diagonal.
///
/// Pivots at or below `1e-14 · tr(S)/n` are rejected.
pub fn cholesky_lower(s: &ComplexMatrix) -> Result<ComplexMatrix> {
    s.ensure_hermitian()?;
    let n = s.rows();
    let floor = 1e-14 * s.trace().re.abs() / n as f64;
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = s[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > floor) {
            return Err(Error::NotPositiveDefinite(format!("pivot {j} is {d:e}")));
        }
        let ljj = d.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut v = s[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = v / ljj;
        }
    }
    Ok(l)
}

/// Solves `L X = B` for lower-triangular `L`.
pub fn lower_solve(l: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = l.rows();
    if !l.is_square() || b.rows() != n {
        return Err(shape_err("lower_solve", format!("{:?} and {:?}", l.shape(), b.shape())));
    }
    let m = b.cols();
    let mut x = b.clone();
    for i in 0..n {
        let d = l[(i, i)];
        if d == ZERO {
            return Err(Error::SingularTriangular);
        }
        for k in 0..i {
            let lik = l[(i, k)];
            if lik == ZERO {
                continue;
            }
            for j in 0..m {
                let xk = x[(k, j)];
                x[(i, j)] -= lik * xk;
            }
        }
        for j in 0..m {
            x[(i, j)] /= d;
        }
    }
    Ok(x)
}

/// Solves `U X = B` for upper-triangular `U`.
pub fn upper_solve(u: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = u.rows();
    if !u.is_square() || b.rows() != n {
        return Err(shape_err("upper_solve", format!("{:?} and {:?}", u.shape(), b.shape())));
    }
    let m = b.cols();
    let mut x = b.clone();
    for i in (0..n).rev() {
        let d = u[(i, i)];
        if d == ZERO {
            return Err(Error::SingularTriangular);
        }
        for k in i + 1..n {
            let uik = u[(i, k)];
            if uik == ZERO {
                continue;
            }
            for j in 0..m {
                let xk = x[(k, j)];
                x[(i, j)] -= uik * xk;
            }
        }
        for j in 0..m {
            x[(i, j)] /= d;
        }
    }
    Ok(x)
}

/// `exp(H)` for Hermitian `H`.
pub fn expm_hermitian(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(hermitian_eig(h)?.apply_fn(f64::exp))
}

/// Principal logarithm of a Hermitian positive-definite matrix.
pub fn logm_pd(s: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(s)?;
    let min = eig.eigenvalues[0];
    if !(min > 0.0) {
        return Err(Error::NotPositiveDefinite(format!("smallest eigenvalue {min:e}")));
    }
    Ok(eig.apply_fn(f64::ln))
}
