use super::Graph;
use crate::error::Result;
use crate::matcore::ComplexMatrix;
use num_complex::Complex64;
use rand::Rng;

/// Outcome of a finite-difference gradient audit.
#[derive(Clone, Debug)]
pub struct FdReport {
    /// Largest relative deviation over the sampled directions.
    pub max_rel_deviation: f64,
    /// `(variable, row, col, imaginary, analytic, finite_difference)` per sample.
    pub samples: Vec<(usize, usize, usize, bool, f64, f64)>,
}

impl FdReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_rel_deviation <= tol
    }
}

/// Compares reverse-mode gradients with central differences along
/// `directions` random coordinate directions (real or imaginary unit in one
/// entry of one variable), step `1e-5 (1 + ‖X‖_F)`.
///
/// The deviation of each sample is scaled by the larger of the two
/// derivatives, floored at `1e-3` of the largest analytic derivative so that
/// near-zero entries do not dominate.
pub fn check_gradient_fd<R: Rng + ?Sized>(
    graph: &Graph,
    values: &[&ComplexMatrix],
    directions: usize,
    rng: &mut R,
) -> Result<FdReport> {
    let grads = graph.gradient_ordered(values)?.into_matrices();
    let scale = grads.iter().map(|g| 2.0 * g.max_abs()).fold(0.0, f64::max);
    let floor = (1e-3 * scale).max(1e-12);

    let mut samples = Vec::with_capacity(directions);
    let mut worst: f64 = 0.0;
    for _ in 0..directions {
        let v = rng.random_range(0..values.len());
        let (rows, cols) = values[v].shape();
        let (i, j) = (rng.random_range(0..rows), rng.random_range(0..cols));
        let imaginary = rng.random_bool(0.5);
        let unit = if imaginary { Complex64::new(0.0, 1.0) } else { Complex64::new(1.0, 0.0) };
        let h = 1e-5 * (1.0 + values[v].frobenius_norm());

        let shifted = |sign: f64| -> Result<f64> {
            let mut x = values[v].clone();
            x[(i, j)] += unit * (sign * h);
            let mut vals: Vec<&ComplexMatrix> = values.to_vec();
            vals[v] = &x;
            graph.forward(&vals)?.value()
        };
        let fd = (shifted(1.0)? - shifted(-1.0)?) / (2.0 * h);
        let g = grads[v][(i, j)];
        let analytic = 2.0 * (g.conj() * unit).re;
        let dev = (fd - analytic).abs() / analytic.abs().max(fd.abs()).max(floor);
        worst = worst.max(dev);
        samples.push((v, i, j, imaginary, analytic, fd));
    }
    Ok(FdReport { max_rel_deviation: worst, samples })
}
