//! Riemannian optimization on the complex Stiefel manifold and the cone of
//! Hermitian positive-definite matrices, with the quantum toolkit needed to
//! build circuits, tomography likelihoods and ternary MERA energies.

pub mod autodiff;
pub mod error;
pub mod matcore;
pub mod mera;
pub mod optim;
pub mod pdcone;
pub mod quantum;
pub mod rng;
pub mod stiefel;

pub use error::{Error, Result};
pub use matcore::ComplexMatrix;
pub use num_complex::Complex64;
