//! Qubit registers, gates, entropies, the tetrahedral POVM and the
//! transverse-field Ising bond term, in plain and differentiable form.
//!
//! Qubit 0 is the most significant bit of a basis index, so a register of
//! `n` qubits is a `2^n x 1` column and `A ⊗ B` puts `A` on the leading
//! qubits.

use crate::autodiff::{Graph, NodeId};
use crate::error::{shape_err, Error, Result};
use crate::matcore::{hermitian_eig, inverse_permutation, permute_axes, ComplexMatrix};
use num_complex::Complex64;
use rand::Rng;
use std::fmt::Write as _;

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// CNOT with the first qubit as control.
pub fn cnot() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    m[(0, 0)] = c(1., 0.);
    m[(1, 1)] = c(1., 0.);
    m[(2, 3)] = c(1., 0.);
    m[(3, 2)] = c(1., 0.);
    m
}

/// SWAP of two qudits of dimension `d`.
pub fn swap(d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            m[(b * d + a, a * d + b)] = c(1., 0.);
        }
    }
    m
}

/// `|0…0⟩` on `n` qubits.
pub fn zero_state(n: usize) -> ComplexMatrix {
    ComplexMatrix::eye(1 << n, 1)
}

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(ComplexMatrix);

impl StateVector {
    pub fn new(psi: ComplexMatrix) -> Result<Self> {
        if psi.cols() != 1 || !psi.rows().is_power_of_two() {
            return Err(shape_err("StateVector", format!("{:?}", psi.shape())));
        }
        let norm = psi.frobenius_norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::ConstraintViolation { residual: (norm - 1.0).abs() });
        }
        Ok(Self(psi))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn n_qubits(&self) -> usize {
        self.0.rows().trailing_zeros() as usize
    }
}

/// Hermitian, positive semidefinite, unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        let e = hermitian_eig(&rho)?;
        let tr = rho.trace().re;
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::ConstraintViolation { residual: (tr - 1.0).abs() });
        }
        if e.eigenvalues[0] < -1e-10 {
            return Err(Error::NotPositiveDefinite(format!("eigenvalue {:e}", e.eigenvalues[0])));
        }
        Ok(Self(rho.hermitian_part()))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Fails unless `‖U†U − I‖_F ≤ 1e-10`.
pub fn ensure_unitary(u: &ComplexMatrix) -> Result<()> {
    if !u.is_square() {
        return Err(shape_err("gate", format!("{:?}", u.shape())));
    }
    let residual = u.isometry_residual();
    if !(residual <= 1e-10) {
        return Err(Error::NonUnitaryGate { residual });
    }
    Ok(())
}

fn gate_layout(targets: &[usize], n_qubits: usize, gate_dim: usize) -> Result<Vec<usize>> {
    if 1usize << targets.len() != gate_dim {
        return Err(shape_err("apply_gate", format!("{gate_dim}-dim gate on {} qubits", targets.len())));
    }
    let mut used = vec![false; n_qubits];
    for &t in targets {
        if t >= n_qubits || std::mem::replace(&mut used[t], true) {
            return Err(Error::InvalidArgument(format!("bad target list {targets:?}")));
        }
    }
    let mut perm = targets.to_vec();
    perm.extend((0..n_qubits).filter(|q| !used[*q]));
    Ok(perm)
}

/// Applies a unitary on `targets` (first target most significant) to a
/// `2^n x 1` state.
pub fn apply_gate(psi: &ComplexMatrix, gate: &ComplexMatrix, targets: &[usize], n_qubits: usize) -> Result<ComplexMatrix> {
    if psi.shape() != (1 << n_qubits, 1) {
        return Err(shape_err("apply_gate", format!("state {:?} for {n_qubits} qubits", psi.shape())));
    }
    ensure_unitary(gate)?;
    let perm = gate_layout(targets, n_qubits, gate.rows())?;
    let dims = vec![2; n_qubits];
    let k = gate.rows();
    let moved = ComplexMatrix::from_vec(k, psi.len() / k, permute_axes(psi.as_slice(), &dims, &perm));
    let out = gate * &moved;
    let back = permute_axes(out.as_slice(), &dims, &inverse_permutation(&perm));
    Ok(ComplexMatrix::from_vec(psi.rows(), 1, back))
}

/// Differentiable [`apply_gate`]; `gate` may be a variable or a constant.
pub fn apply_gate_node(g: &mut Graph, psi: NodeId, gate: NodeId, targets: &[usize], n_qubits: usize) -> Result<NodeId> {
    let dim = 1usize << n_qubits;
    if g.node_shape(psi) != (dim, 1) {
        return Err(shape_err("apply_gate", format!("state {:?} for {n_qubits} qubits", g.node_shape(psi))));
    }
    let k = g.node_shape(gate).0;
    let perm = gate_layout(targets, n_qubits, k)?;
    let dims = vec![2; n_qubits];
    let moved = g.permute(psi, &dims, &perm, k, dim / k)?;
    let out = g.matmul(gate, moved)?;
    g.permute(out, &dims, &inverse_permutation(&perm), dim, 1)
}

/// Reduced density matrix on `keep` of a state on subsystems `dims`.
pub fn partial_trace(rho: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let d: usize = dims.iter().product();
    if rho.shape() != (d, d) {
        return Err(shape_err("partial_trace", format!("{:?} for dims {dims:?}", rho.shape())));
    }
    let mut kept = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() || std::mem::replace(&mut kept[k], true) {
            return Err(Error::InvalidArgument(format!("bad subsystem list {keep:?}")));
        }
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !kept[*k]).collect();
    let r = dims.len();
    // row axes 0..r, column axes r..2r
    let mut perm: Vec<usize> = keep.to_vec();
    perm.extend(&traced);
    perm.extend(keep.iter().map(|k| k + r));
    perm.extend(traced.iter().map(|k| k + r));
    let mut full_dims = dims.to_vec();
    full_dims.extend_from_slice(dims);
    let data = permute_axes(rho.as_slice(), &full_dims, &perm);
    let dk: usize = keep.iter().map(|&k| dims[k]).product();
    let dt = d / dk;
    let mut out = ComplexMatrix::zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut s = c(0., 0.);
            for t in 0..dt {
                s += data[((i * dt + t) * dk + j) * dt + t];
            }
            out[(i, j)] = s;
        }
    }
    Ok(out)
}

/// `−ln tr ρ_A²` for the leading `n_a` qubits of a pure state.
pub fn renyi2_entropy(psi: &ComplexMatrix, n_qubits: usize, n_a: usize) -> Result<f64> {
    if psi.shape() != (1 << n_qubits, 1) || n_a == 0 || n_a >= n_qubits {
        return Err(shape_err("renyi2_entropy", format!("{:?}, {n_a} of {n_qubits}", psi.shape())));
    }
    let m = psi.reshape(1 << n_a, 1 << (n_qubits - n_a))?;
    let rho = &m * &m.adjoint();
    Ok(-rho.norm_sqr().ln())
}

/// Differentiable `ln tr ρ_A² = −S₂` for the leading `n_a` qubits.
pub fn log_purity_node(g: &mut Graph, psi: NodeId, n_qubits: usize, n_a: usize) -> Result<NodeId> {
    let m = g.reshape(psi, 1 << n_a, 1 << (n_qubits - n_a))?;
    let ma = g.adjoint(m);
    let rho = g.matmul(m, ma)?;
    let sq = g.abs_sq(rho);
    let purity = g.sum(sq);
    Ok(g.ln(purity))
}

/// Bond term `σᶻσᶻ + (h/2)(σˣ ⊗ I + I ⊗ σˣ)` of the chain
/// `H = Σ σᶻσᶻ + h Σ σˣ`.
pub fn tfi_local_terms(hx: f64) -> ComplexMatrix {
    let (x, z, i) = (pauli_x(), pauli_z(), ComplexMatrix::identity(2));
    z.kron(&z) + (x.kron(&i) + i.kron(&x)) * (0.5 * hx)
}

/// Dense periodic chain Hamiltonian built bit by bit, for cross-checks.
pub fn tfi_dense_hamiltonian(n: usize, hx: f64) -> ComplexMatrix {
    let dim = 1usize << n;
    let mut h = ComplexMatrix::zeros(dim, dim);
    for s in 0..dim {
        let bit = |q: usize| (s >> (n - 1 - q)) & 1;
        let mut diag = 0.0;
        for q in 0..n {
            diag += if bit(q) == bit((q + 1) % n) { 1.0 } else { -1.0 };
            h[(s ^ (1 << (n - 1 - q)), s)] += c(hx, 0.);
        }
        h[(s, s)] += c(diag, 0.);
    }
    h
}

/// Tetrahedral single-qubit POVM `M_α = (I + s_α·σ)/4`.
#[derive(Clone, Debug)]
pub struct Povm {
    pub elements: Vec<ComplexMatrix>,
}

pub fn tetra_povm() -> Povm {
    let r2 = 2f64.sqrt();
    let s = [
        [0.0, 0.0, 1.0],
        [2.0 * r2 / 3.0, 0.0, -1.0 / 3.0],
        [-r2 / 3.0, (2.0f64 / 3.0).sqrt(), -1.0 / 3.0],
        [-r2 / 3.0, -(2.0f64 / 3.0).sqrt(), -1.0 / 3.0],
    ];
    let (x, y, z, i) = (pauli_x(), pauli_y(), pauli_z(), ComplexMatrix::identity(2));
    let elements = s
        .iter()
        .map(|v| (&i + &(&x * v[0]) + &y * v[1] + &z * v[2]) * 0.25)
        .collect();
    Povm { elements }
}

impl Povm {
    pub fn outcomes(&self) -> usize {
        self.elements.len()
    }

    /// Element of the product POVM on `n` qubits for a multi-index given as
    /// a base-`outcomes` number, first qubit most significant.
    pub fn product_element(&self, index: usize, n: usize) -> ComplexMatrix {
        let k = self.outcomes();
        let mut m = ComplexMatrix::identity(1);
        for q in 0..n {
            let digit = (index / k.pow((n - 1 - q) as u32)) % k;
            m = m.kron(&self.elements[digit]);
        }
        m
    }

    /// Matrix whose row `α` is `vec(M_αᵀ)`, so that `E vec(S)` lists
    /// `tr(M_α S)`.
    pub fn probability_map(&self, n: usize, rows: &[usize]) -> ComplexMatrix {
        let d = 1usize << n;
        let mut e = ComplexMatrix::zeros(rows.len(), d * d);
        for (r, &alpha) in rows.iter().enumerate() {
            let m = self.product_element(alpha, n);
            for i in 0..d {
                for j in 0..d {
                    e[(r, i * d + j)] = m[(j, i)];
                }
            }
        }
        e
    }
}

/// Outcome counts over all `4^n` multi-indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurementRecord {
    pub n_qubits: usize,
    pub counts: Vec<u64>,
}

impl MeasurementRecord {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn digits(&self, index: usize) -> String {
        (0..self.n_qubits)
            .map(|q| char::from(b'0' + ((index >> (2 * (self.n_qubits - 1 - q))) & 3) as u8))
            .collect()
    }

    /// `outcome,count` rows, outcome as base-4 digits with the first qubit
    /// first.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("outcome,count\n");
        for (i, &n) in self.counts.iter().enumerate() {
            let _ = writeln!(out, "{},{n}", self.digits(i));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("outcome,count") {
            return Err(Error::Parse("expected header `outcome,count`".into()));
        }
        let mut n_qubits = None;
        let mut counts = Vec::new();
        let mut seen = Vec::new();
        for (ln, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (outcome, count) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("line {}: `{line}`", ln + 2)))?;
            let n = *n_qubits.get_or_insert(outcome.len());
            if outcome.len() != n || n == 0 {
                return Err(Error::Parse(format!("line {}: outcome length", ln + 2)));
            }
            if counts.is_empty() {
                counts = vec![0u64; 1 << (2 * n)];
                seen = vec![false; counts.len()];
            }
            let mut idx = 0usize;
            for ch in outcome.chars() {
                let d = ch.to_digit(4).ok_or_else(|| Error::Parse(format!("line {}: digit `{ch}`", ln + 2)))?;
                idx = idx * 4 + d as usize;
            }
            if std::mem::replace(&mut seen[idx], true) {
                return Err(Error::Parse(format!("line {}: duplicate outcome", ln + 2)));
            }
            counts[idx] = count
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", ln + 2)))?;
        }
        let n_qubits = n_qubits.ok_or_else(|| Error::Parse("no outcomes".into()))?;
        Ok(Self { n_qubits, counts })
    }
}

/// Outcome probabilities of `rho` under the product POVM.
pub fn outcome_probabilities(rho: &ComplexMatrix, povm: &Povm, n_qubits: usize) -> Result<Vec<f64>> {
    let d = 1usize << n_qubits;
    if rho.shape() != (d, d) {
        return Err(shape_err("outcome_probabilities", format!("{:?}", rho.shape())));
    }
    let all: Vec<usize> = (0..povm.outcomes().pow(n_qubits as u32)).collect();
    let e = povm.probability_map(n_qubits, &all);
    let p = &e * &rho.reshape(d * d, 1)?;
    Ok(p.as_slice().iter().map(|z| z.re).collect())
}

/// Draws `shots` outcomes by inverse CDF over the full outcome table.
pub fn sample_measurements<R: Rng + ?Sized>(
    rho: &ComplexMatrix,
    povm: &Povm,
    n_qubits: usize,
    shots: u64,
    rng: &mut R,
) -> Result<MeasurementRecord> {
    let p = outcome_probabilities(rho, povm, n_qubits)?;
    let mut cdf = Vec::with_capacity(p.len());
    let mut acc = 0.0;
    for &x in &p {
        acc += x.max(0.0);
        cdf.push(acc);
    }
    if !(acc > 0.0) {
        return Err(Error::DomainError("outcome probabilities vanish".into()));
    }
    let mut counts = vec![0u64; p.len()];
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * acc;
        let k = cdf.partition_point(|&c| c <= u).min(p.len() - 1);
        counts[k] += 1;
    }
    Ok(MeasurementRecord { n_qubits, counts })
}

/// `Σ_α n_α ln(tr(M_α S)/tr S)`, invariant under positive rescaling of `S`.
pub fn log_likelihood(s: &ComplexMatrix, record: &MeasurementRecord, povm: &Povm) -> Result<f64> {
    let n = record.n_qubits;
    let d = 1usize << n;
    if s.shape() != (d, d) {
        return Err(shape_err("log_likelihood", format!("{:?} for {n} qubits", s.shape())));
    }
    let tr = s.trace().re;
    let mut total = 0.0;
    for (alpha, &count) in record.counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let p = povm.product_element(alpha, n).dot(s).re / tr;
        if !(p >= 1e-300) {
            return Err(Error::DomainError(format!("outcome {alpha} has probability {p:e}")));
        }
        total += count as f64 * p.ln();
    }
    Ok(total)
}

/// Differentiable log-likelihood divided by `scale`; only observed outcomes
/// enter the graph.
pub fn log_likelihood_node(g: &mut Graph, s: NodeId, record: &MeasurementRecord, povm: &Povm, scale: f64) -> Result<NodeId> {
    let n = record.n_qubits;
    let d = 1usize << n;
    if g.node_shape(s) != (d, d) {
        return Err(shape_err("log_likelihood", format!("{:?} for {n} qubits", g.node_shape(s))));
    }
    let observed: Vec<usize> = (0..record.counts.len()).filter(|&a| record.counts[a] > 0).collect();
    if observed.is_empty() {
        return Err(Error::InvalidArgument("empty measurement record".into()));
    }
    let e = g.constant(povm.probability_map(n, &observed));
    let weights = ComplexMatrix::from_vec(
        observed.len(),
        1,
        observed.iter().map(|&a| c(record.counts[a] as f64 / scale, 0.)).collect(),
    );
    let w = g.constant(weights);
    let v = g.reshape(s, d * d, 1)?;
    let num = g.matmul(e, v)?;
    let tr = g.trace(s)?;
    let p = g.div_scalar(num, tr)?;
    let lp = g.ln(p);
    let weighted = g.hadamard(w, lp)?;
    let total = g.sum(weighted);
    Ok(g.real(total))
}

/// `½ ‖ρ − σ‖₁`.
pub fn trace_distance(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    let e = hermitian_eig(&(rho - sigma))?;
    Ok(0.5 * e.eigenvalues.iter().map(|x| x.abs()).sum::<f64>())
}

/// Random density matrix from the Hilbert–Schmidt measure.
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::ginibre(d, d, rng);
    let rho = &g * &g.adjoint();
    let tr = rho.trace().re;
    (rho * (1.0 / tr)).hermitian_part()
}

/// Haar-random pure state.
pub fn random_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::ginibre(d, 1, rng);
    let n = g.frobenius_norm();
    g * (1.0 / n)
}

/// `|⟨a|b⟩|`.
pub fn overlap(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.dot(b).norm()
}
