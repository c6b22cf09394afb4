//! Seeded sampling helpers shared by the randomized searches, the campaign
//! harness and the test suites.

use num_complex::Complex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{BasisChange, EvolutionAlgebra};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard complex Gaussian: real and imaginary parts `N(0, 1/2)`.
pub fn complex_gaussian<R: Real>(rng: &mut impl Rng) -> Complex<R> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex::new(R::lit(re * s), R::lit(im * s))
}

/// Uniform in the square `[-1, 1] x [-1, 1]`.
pub fn complex_uniform<R: Real>(rng: &mut impl Rng) -> Complex<R> {
    Complex::new(R::lit(rng.random_range(-1.0..=1.0)), R::lit(rng.random_range(-1.0..=1.0)))
}

/// Modulus uniform in `[lo, hi]`, phase uniform.
pub fn complex_annulus<R: Real>(rng: &mut impl Rng, lo: f64, hi: f64) -> Complex<R> {
    let r = rng.random_range(lo..=hi);
    let t = rng.random_range(0.0..std::f64::consts::TAU);
    Complex::new(R::lit(r * t.cos()), R::lit(r * t.sin()))
}

pub fn gaussian_matrix<R: Real>(rng: &mut impl Rng, n: usize) -> Matrix<R> {
    Matrix::from_fn(n, n, |_, _| complex_gaussian(rng))
}

pub fn random_permutation(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Nonzero diagonal scaling composed with a permutation.
pub fn random_natural_change<R: Real>(rng: &mut impl Rng, n: usize) -> BasisChange<R> {
    let d: Vec<Complex<R>> = (0..n).map(|_| complex_annulus(rng, 0.5, 2.0)).collect();
    BasisChange::diagonal(&d).then(&BasisChange::permutation(&random_permutation(rng, n)))
}

/// Random structure matrix where each entry is nonzero with probability
/// `density`.
pub fn sparse_algebra<R: Real>(rng: &mut impl Rng, n: usize, density: f64) -> EvolutionAlgebra<R> {
    let m = Matrix::from_fn(n, n, |_, _| {
        if rng.random_bool(density) {
            complex_annulus(rng, 0.5, 2.0)
        } else {
            Complex::new(R::zero(), R::zero())
        }
    });
    EvolutionAlgebra::new(m).expect("finite square matrix")
}
