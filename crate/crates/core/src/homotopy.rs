//! Path tracking for square quadratic systems `P (x∘x) - Q x = 0`, where
//! `x∘x` is the coordinatewise square.
//!
//! The start system `x∘x - x = 0` has the `2^n` roots in `{0,1}^n`, which
//! matches the Bezout bound, so with a random complex `gamma` every
//! isolated root of the target is the endpoint of some path.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::linalg::{max_abs, Matrix};
use crate::random::{complex_gaussian, rng_for};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSystem<R> {
    p: Matrix<R>,
    q: Matrix<R>,
}

impl<R: Real> QuadraticSystem<R> {
    pub fn new(p: Matrix<R>, q: Matrix<R>) -> Self {
        assert!(p.is_square() && q.is_square() && p.rows() == q.rows());
        Self { p, q }
    }

    pub fn dim(&self) -> usize {
        self.p.rows()
    }

    pub fn residual(&self, x: &[Complex<R>]) -> Vec<Complex<R>> {
        let sq: Vec<Complex<R>> = x.iter().map(|&z| z * z).collect();
        let a = self.p.mul_vec(&sq);
        let b = self.q.mul_vec(x);
        a.iter().zip(&b).map(|(&u, &v)| u - v).collect()
    }

    /// Residual relative to the size of the two terms.
    pub fn relative_residual(&self, x: &[Complex<R>]) -> R {
        let m = max_abs(x);
        let scale = (self.p.max_abs() * m * m + self.q.max_abs() * m).max(R::one());
        max_abs(&self.residual(x)) / scale
    }

    pub fn jacobian(&self, x: &[Complex<R>]) -> Matrix<R> {
        let n = self.dim();
        Matrix::from_fn(n, n, |i, j| self.p[(i, j)] * x[j].scale(R::lit(2.0)) - self.q[(i, j)])
    }

    fn start_residual(x: &[Complex<R>]) -> Vec<Complex<R>> {
        x.iter().map(|&z| z * z - z).collect()
    }

    fn homotopy(&self, x: &[Complex<R>], t: R, gamma: Complex<R>) -> Vec<Complex<R>> {
        let f = self.residual(x);
        let g = Self::start_residual(x);
        f.iter().zip(&g).map(|(&fi, &gi)| fi.scale(t) + gamma * gi.scale(R::one() - t)).collect()
    }

    fn homotopy_jacobian(&self, x: &[Complex<R>], t: R, gamma: Complex<R>) -> Matrix<R> {
        let mut j = self.jacobian(x).scale(Complex::new(t, R::zero()));
        let s = gamma.scale(R::one() - t);
        for (i, &z) in x.iter().enumerate() {
            j[(i, i)] = j[(i, i)] + s * (z.scale(R::lit(2.0)) - Complex::one());
        }
        j
    }

    /// `dx/dt` along the path.
    fn tangent(&self, x: &[Complex<R>], t: R, gamma: Complex<R>) -> Option<Vec<Complex<R>>> {
        let f = self.residual(x);
        let g = Self::start_residual(x);
        let ht: Vec<Vec<Complex<R>>> = f.iter().zip(&g).map(|(&fi, &gi)| vec![-(fi - gamma * gi)]).collect();
        let rhs = Matrix::from_rows(&ht, 1);
        let sol = self.homotopy_jacobian(x, t, gamma).solve(&rhs, R::epsilon()).ok()?;
        Some(sol.column(0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackConfig {
    pub seed: u64,
    pub min_step: f64,
    pub max_step: f64,
    pub residual_tol: f64,
    pub dedup_tol: f64,
    /// Extra damped-Newton runs from random starts.
    pub newton_starts: usize,
}

impl Default for TrackConfig {
    fn default() -> Self {
        Self { seed: 0, min_step: 1e-6, max_step: 0.1, residual_tol: 1e-9, dedup_tol: 1e-6, newton_starts: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackOutcome<R> {
    pub roots: Vec<Vec<Complex<R>>>,
    pub path_failures: usize,
}

fn add_scaled<R: Real>(x: &[Complex<R>], h: R, d: &[Complex<R>]) -> Vec<Complex<R>> {
    x.iter().zip(d).map(|(&a, &b)| a + b.scale(h)).collect()
}

/// Newton iteration on `f` with Jacobian `jac`; returns the final point and
/// the last step size.
fn newton_steps<R: Real>(
    x0: &[Complex<R>],
    iters: usize,
    tol: R,
    f: impl Fn(&[Complex<R>]) -> Vec<Complex<R>>,
    jac: impl Fn(&[Complex<R>]) -> Matrix<R>,
) -> Option<Vec<Complex<R>>> {
    let mut x = x0.to_vec();
    let mut last = R::infinity();
    for _ in 0..iters {
        let r = f(&x);
        let rhs = Matrix::from_rows(&r.iter().map(|&z| vec![z]).collect::<Vec<_>>(), 1);
        let dx = jac(&x).solve(&rhs, R::epsilon()).ok()?.column(0);
        let step = max_abs(&dx);
        x = add_scaled(&x, -R::one(), &dx);
        if !step.is_finite() {
            return None;
        }
        if step <= tol * (R::one() + max_abs(&x)) {
            return Some(x);
        }
        if step > last * R::lit(2.0) && last < R::lit(1e-3) {
            return None;
        }
        last = step;
    }
    None
}

impl<R: Real> QuadraticSystem<R> {
    fn residual_threshold(cfg: &TrackConfig) -> R {
        R::lit(cfg.residual_tol).max(R::epsilon() * R::lit(1e3))
    }

    /// Newton polish on the target system, accepted only when the relative
    /// residual is below the configured tolerance.
    pub fn polish(&self, x0: &[Complex<R>], cfg: &TrackConfig) -> Option<Vec<Complex<R>>> {
        let tol = R::epsilon() * R::lit(64.0);
        let x = newton_steps(x0, 40, tol, |x| self.residual(x), |x| self.jacobian(x))
            .or_else(|| Some(x0.to_vec()))?;
        (self.relative_residual(&x) <= Self::residual_threshold(cfg)).then_some(x)
    }

    fn track(&self, start: Vec<Complex<R>>, gamma: Complex<R>, cfg: &TrackConfig) -> Option<Vec<Complex<R>>> {
        let corr_tol = R::lit(1e-10).max(R::epsilon() * R::lit(16.0));
        let min_step = R::lit(cfg.min_step);
        let max_step = R::lit(cfg.max_step);
        let mut x = start;
        let mut t = R::zero();
        let mut h = R::lit(0.02).min(max_step);
        let six = R::lit(6.0);
        let half = R::lit(0.5);
        while t < R::one() {
            h = h.min(R::one() - t);
            let step = (|| {
                let k1 = self.tangent(&x, t, gamma)?;
                let k2 = self.tangent(&add_scaled(&x, h * half, &k1), t + h * half, gamma)?;
                let k3 = self.tangent(&add_scaled(&x, h * half, &k2), t + h * half, gamma)?;
                let k4 = self.tangent(&add_scaled(&x, h, &k3), t + h, gamma)?;
                let pred: Vec<Complex<R>> = (0..x.len())
                    .map(|i| x[i] + (k1[i] + k2[i].scale(R::lit(2.0)) + k3[i].scale(R::lit(2.0)) + k4[i]).scale(h / six))
                    .collect();
                let t1 = t + h;
                let corrected = newton_steps(
                    &pred,
                    4,
                    corr_tol,
                    |y| self.homotopy(y, t1, gamma),
                    |y| self.homotopy_jacobian(y, t1, gamma),
                )?;
                // reject corrections that jump far from the prediction
                let jump = max_abs(&add_scaled(&corrected, -R::one(), &pred));
                (jump <= R::lit(0.1) * (R::one() + max_abs(&pred))).then_some(corrected)
            })();
            match step {
                Some(next) => {
                    x = next;
                    t = t + h;
                    h = (h * R::lit(1.5)).min(max_step);
                    if max_abs(&x) > R::lit(1e10) {
                        return None;
                    }
                }
                None => {
                    h = h * half;
                    if h < min_step {
                        // singular endpoint: try to land directly
                        return if t > R::lit(0.98) { self.polish(&x, cfg) } else { None };
                    }
                }
            }
        }
        self.polish(&x, cfg)
    }

    /// Tracks all `2^n` paths and any extra Newton starts, deduplicating
    /// the verified endpoints.
    pub fn solve(&self, cfg: &TrackConfig) -> TrackOutcome<R> {
        let n = self.dim();
        assert!(n < usize::BITS as usize, "dimension too large for total-degree tracking");
        let mut rng = rng_for(cfg.seed, 0x686f_6d6f);
        let gamma: Complex<R> = complex_gaussian(&mut rng);
        let gamma = gamma / Complex::new(gamma.norm(), R::zero());
        let mut roots: Vec<Vec<Complex<R>>> = Vec::new();
        let mut failures = 0;
        let dedup = R::lit(cfg.dedup_tol);
        let push = |roots: &mut Vec<Vec<Complex<R>>>, x: Vec<Complex<R>>| {
            let fresh = roots.iter().all(|r| {
                let d = r.iter().zip(&x).map(|(&a, &b)| (a - b).norm()).fold(R::zero(), R::max);
                d > dedup * (R::one() + max_abs(&x))
            });
            if fresh {
                roots.push(x);
            }
        };
        let start = |mask: usize| -> Vec<Complex<R>> {
            (0..n).map(|i| if mask >> i & 1 == 1 { Complex::one() } else { Complex::zero() }).collect()
        };
        let mut ends: Vec<Option<Vec<Complex<R>>>> =
            (0..1usize << n).map(|mask| self.track(start(mask), gamma, cfg)).collect();
        // paths ending on the same root suggest a jump; retrack them with finer steps
        let mut fine = *cfg;
        for _ in 0..2 {
            let clash = colliding(&ends, dedup);
            if clash.is_empty() {
                break;
            }
            fine.max_step /= 8.0;
            for mask in clash {
                ends[mask] = self.track(start(mask), gamma, &fine);
            }
        }
        for e in ends {
            match e {
                Some(x) => push(&mut roots, x),
                None => failures += 1,
            }
        }
        for _ in 0..cfg.newton_starts {
            let x0: Vec<Complex<R>> = (0..n).map(|_| complex_gaussian(&mut rng)).collect();
            let tol = R::epsilon() * R::lit(64.0);
            if let Some(x) = newton_steps(&x0, 60, tol, |x| self.residual(x), |x| self.jacobian(x)) {
                if self.relative_residual(&x) <= Self::residual_threshold(cfg) {
                    push(&mut roots, x);
                }
            }
        }
        TrackOutcome { roots, path_failures: failures }
    }
}

/// Indices of endpoints that coincide with another endpoint.
fn colliding<R: Real>(ends: &[Option<Vec<Complex<R>>>], dedup: R) -> Vec<usize> {
    let same = |a: &[Complex<R>], b: &[Complex<R>]| {
        let d = a.iter().zip(b).map(|(&x, &y)| (x - y).norm()).fold(R::zero(), R::max);
        d <= dedup * (R::one() + max_abs(a))
    };
    (0..ends.len())
        .filter(|&i| {
            ends[i].as_deref().is_some_and(|a| (0..ends.len()).any(|j| j != i && ends[j].as_deref().is_some_and(|b| same(a, b))))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn diagonal_system_has_all_sign_patterns() {
        // x_i^2 = d_i x_i: roots are x_i in {0, d_i}
        let d = [cplx::<f64>(2., 0.), cplx(-1., 1.), cplx(0.5, 0.)];
        let sys = QuadraticSystem::new(Matrix::identity(3), Matrix::diagonal(&d));
        let out = sys.solve(&TrackConfig::default());
        assert_eq!(out.path_failures, 0);
        assert_eq!(out.roots.len(), 8);
        for r in &out.roots {
            for i in 0..3 {
                assert!(r[i].norm() < 1e-9 || (r[i] - d[i]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn generic_two_by_two_has_four_roots() {
        let m = Matrix::from_rows(&[vec![cplx::<f64>(1., 0.), cplx(2., 0.)], vec![cplx(-1., 0.5), cplx(0.3, 0.)]], 2);
        let sys = QuadraticSystem::new(Matrix::identity(2), m);
        let out = sys.solve(&TrackConfig::default());
        assert_eq!(out.roots.len(), 4);
        for r in &out.roots {
            assert!(sys.relative_residual(r) < 1e-9);
        }
    }
}
