//! Computation with finite-dimensional complex evolution algebras.

pub mod algebra;
pub mod condition_p;
pub mod conjecture;
pub mod eigen;
pub mod error;
pub mod homotopy;
pub mod io;
pub mod linalg;
pub mod natural_basis;
pub mod nilpotency;
pub mod permutation;
pub mod random;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Real, Tolerance};

pub use num_complex::Complex;

/// Double-precision complex scalar.
pub type C64 = Complex<f64>;
/// Double-precision evolution algebra.
pub type Algebra = algebra::EvolutionAlgebra<f64>;
