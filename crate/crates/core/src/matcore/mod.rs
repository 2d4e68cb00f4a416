//! Dense complex matrices and the handful of factorizations the optimizers
//! rely on.
//!
//! Storage is row-major. Products above a small size go through a blocked
//! complex GEMM; factorizations are delegated to `nalgebra`.

mod decomp;
mod tensor;

pub use decomp::{
    cholesky_lower, expm_hermitian, haar_unitary, hermitian_eig, logm_pd, lower_solve, qr_thin,
    solve, svd, upper_solve, EigenDecomposition, Svd,
};
pub use tensor::{inverse_permutation, permute_axes};

use crate::error::{shape_err, Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major data, rejecting empty shapes and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension(format!("{rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(shape_err(
                "ComplexMatrix::new",
                format!("{} entries for {rows}x{cols}", data.len()),
            ));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Internal constructor for data produced by finite arithmetic.
    pub(crate) fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_vec(rows, cols, vec![ZERO; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    /// First `cols` columns of the `rows`-dimensional identity.
    pub fn eye(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows.min(cols) {
            m.data[i * cols + i] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_vec(rows, cols, data)
    }

    /// Builds from real row-major data.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Column vector.
    pub fn column(data: Vec<Complex64>) -> Result<Self> {
        let n = data.len();
        Self::new(n, 1, data)
    }

    /// Matrix with independent standard complex Gaussian entries
    /// (real and imaginary parts each of variance 1/2).
    pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_fn(rows, cols, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(s * re, s * im)
        })
    }

    /// Random Hermitian matrix `(G + G†)/2` with Ginibre `G`.
    pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self::ginibre(n, n, rng).hermitian_part()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Same data viewed with a different shape.
    pub fn reshape(&self, rows: usize, cols: usize) -> Result<Self> {
        if rows * cols != self.data.len() {
            return Err(shape_err(
                "reshape",
                format!("{}x{} to {rows}x{cols}", self.rows, self.cols),
            ));
        }
        Ok(Self::from_vec(rows, cols, self.data.clone()))
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_vec(self.rows, self.cols, self.data.iter().map(|&z| f(z)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.shape(), other.shape(), "zip_map shape mismatch");
        Self::from_vec(
            self.rows,
            self.cols,
            self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub fn adjoint(&self) -> Self {
        let (r, c) = (self.rows, self.cols);
        let mut out = Vec::with_capacity(r * c);
        for j in 0..c {
            for i in 0..r {
                out.push(self.data[i * c + j].conj());
            }
        }
        Self::from_vec(c, r, out)
    }

    pub fn transpose(&self) -> Self {
        let (r, c) = (self.rows, self.cols);
        let mut out = Vec::with_capacity(r * c);
        for j in 0..c {
            for i in 0..r {
                out.push(self.data[i * c + j]);
            }
        }
        Self::from_vec(c, r, out)
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    /// Elementwise real part, as a complex matrix.
    pub fn real_part(&self) -> Self {
        self.map(|z| Complex64::new(z.re, 0.0))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn hadamard(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self.data[i * self.cols + i]).sum()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self.data[i * self.cols + i]).collect()
    }

    pub fn sum(&self) -> Complex64 {
        self.data.iter().sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `tr(A† B)`.
    pub fn dot(&self, other: &Self) -> Complex64 {
        assert_eq!(self.shape(), other.shape(), "dot shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square(), "hermitian_part of a non-square matrix");
        let n = self.rows;
        Self::from_fn(n, n, |i, j| 0.5 * (self.data[i * n + j] + self.data[j * n + i].conj()))
    }

    /// `‖A − A†‖_F`.
    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += (self.data[i * n + j] - self.data[j * n + i].conj()).norm_sqr();
            }
        }
        s.sqrt()
    }

    /// Fails unless `‖A − A†‖_F ≤ 1e-10 (1 + ‖A‖_F)`.
    pub fn ensure_hermitian(&self) -> Result<()> {
        if !self.is_square() {
            return Err(shape_err("hermitian check", format!("{}x{}", self.rows, self.cols)));
        }
        let r = self.hermitian_residual();
        if r > 1e-10 * (1.0 + self.frobenius_norm()) {
            return Err(Error::NonHermitianInput { residual: r });
        }
        Ok(())
    }

    /// `‖A†A − I‖_F`.
    pub fn isometry_residual(&self) -> f64 {
        (&self.adjoint() * self - Self::identity(self.cols)).frobenius_norm()
    }

    /// Kronecker product with `self` as the most significant factor.
    pub fn kron(&self, other: &Self) -> Self {
        let (ar, ac) = self.shape();
        let (br, bc) = other.shape();
        let cols = ac * bc;
        let mut out = vec![ZERO; ar * br * cols];
        for i in 0..ar {
            for j in 0..ac {
                let a = self.data[i * ac + j];
                if a == ZERO {
                    continue;
                }
                for k in 0..br {
                    let row = (i * br + k) * cols + j * bc;
                    for l in 0..bc {
                        out[row + l] = a * other.data[k * bc + l];
                    }
                }
            }
        }
        Self::from_vec(ar * br, cols, out)
    }

    /// Columns `start..start+count`.
    pub fn columns(&self, start: usize, count: usize) -> Self {
        assert!(start + count <= self.cols, "column range out of bounds");
        Self::from_fn(self.rows, count, |i, j| self.data[i * self.cols + start + j])
    }

    /// Matrix product returning an error on incompatible shapes.
    pub fn try_matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(shape_err(
                "matmul",
                format!("{}x{} times {}x{}", self.rows, self.cols, other.rows, other.cols),
            ));
        }
        Ok(matmul(self, other))
    }

    /// Strictly lower triangle plus half the diagonal.
    pub fn lower_half(&self) -> Self {
        let n = self.cols;
        Self::from_fn(self.rows, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => self.data[i * n + j],
            std::cmp::Ordering::Equal => 0.5 * self.data[i * n + j],
            std::cmp::Ordering::Less => ZERO,
        })
    }

    /// Strictly lower triangle.
    pub fn strict_lower(&self) -> Self {
        let n = self.cols;
        Self::from_fn(self.rows, n, |i, j| if i > j { self.data[i * n + j] } else { ZERO })
    }

    /// Diagonal part as a matrix.
    pub fn diagonal_part(&self) -> Self {
        let n = self.cols;
        Self::from_fn(self.rows, n, |i, j| if i == j { self.data[i * n + j] } else { ZERO })
    }

    pub(crate) fn to_nalgebra(&self) -> nalgebra::DMatrix<Complex64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &nalgebra::DMatrix<Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self.data[i * self.cols + j];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Below this many multiply-adds the plain loop beats the blocked kernel.
const GEMM_THRESHOLD: usize = 4096;

fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (m, k, n) = (a.rows, a.cols, b.cols);
    let mut c = vec![ZERO; m * n];
    if m * k * n < GEMM_THRESHOLD {
        for i in 0..m {
            let crow = &mut c[i * n..(i + 1) * n];
            for p in 0..k {
                let aip = a.data[i * k + p];
                if aip == ZERO {
                    continue;
                }
                let brow = &b.data[p * n..(p + 1) * n];
                for (cij, &bpj) in crow.iter_mut().zip(brow) {
                    *cij += aip * bpj;
                }
            }
        }
    } else {
        // SAFETY: Complex64 is repr(C) with two f64 fields, matching the
        // [f64; 2] layout the kernel expects. The slices have exactly m*k,
        // k*n and m*n elements with the row strides passed below.
        unsafe {
            matrixmultiply::zgemm(
                matrixmultiply::CGemmOption::Standard,
                matrixmultiply::CGemmOption::Standard,
                m,
                k,
                n,
                [1.0, 0.0],
                a.data.as_ptr() as *const [f64; 2],
                k as isize,
                1,
                b.data.as_ptr() as *const [f64; 2],
                n as isize,
                1,
                [0.0, 0.0],
                c.as_mut_ptr() as *mut [f64; 2],
                n as isize,
                1,
            );
        }
    }
    ComplexMatrix::from_vec(m, n, c)
}

impl Mul<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on incompatible shapes; see [`ComplexMatrix::try_matmul`].
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul shape mismatch: {}x{} times {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        matmul(self, rhs)
    }
}

impl Mul<ComplexMatrix> for ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self * &rhs
    }
}

impl Mul<&ComplexMatrix> for ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        &self * rhs
    }
}

impl Mul<ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        self * &rhs
    }
}

impl Mul<Complex64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, s: Complex64) -> ComplexMatrix {
        self.scale(s)
    }
}

impl Mul<Complex64> for ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(mut self, s: Complex64) -> ComplexMatrix {
        self.data.iter_mut().for_each(|z| *z *= s);
        self
    }
}

impl Mul<f64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, s: f64) -> ComplexMatrix {
        self.scale_real(s)
    }
}

impl Mul<f64> for ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(mut self, s: f64) -> ComplexMatrix {
        self.data.iter_mut().for_each(|z| *z *= s);
        self
    }
}

macro_rules! elementwise {
    ($tr:ident, $method:ident, $atr:ident, $amethod:ident, $op:tt) => {
        impl $tr<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;

            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                assert_eq!(self.shape(), rhs.shape(), "elementwise shape mismatch");
                self.zip_map(rhs, |a, b| a $op b)
            }
        }

        impl $tr<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;

            fn $method(mut self, rhs: ComplexMatrix) -> ComplexMatrix {
                self.$amethod(&rhs);
                self
            }
        }

        impl $tr<&ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;

            fn $method(mut self, rhs: &ComplexMatrix) -> ComplexMatrix {
                self.$amethod(rhs);
                self
            }
        }

        impl $tr<ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;

            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                self $op &rhs
            }
        }

        impl $atr<&ComplexMatrix> for ComplexMatrix {
            fn $amethod(&mut self, rhs: &ComplexMatrix) {
                assert_eq!(self.shape(), rhs.shape(), "elementwise shape mismatch");
                for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
                    *a = *a $op b;
                }
            }
        }

        impl $atr<ComplexMatrix> for ComplexMatrix {
            fn $amethod(&mut self, rhs: ComplexMatrix) {
                self.$amethod(&rhs);
            }
        }
    };
}

elementwise!(Add, add, AddAssign, add_assign, +);
elementwise!(Sub, sub, SubAssign, sub_assign, -);

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.map(|z| -z)
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(mut self) -> ComplexMatrix {
        self.data.iter_mut().for_each(|z| *z = -*z);
        self
    }
}
