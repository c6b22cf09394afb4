//! Complex eigenvalues (Hessenberg reduction + shifted QR) and polynomial
//! roots via the companion matrix.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

fn householder_hessenberg<R: Real>(h: &mut Matrix<R>) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let x: Vec<Complex<R>> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<R>().sqrt();
        if norm == R::zero() {
            continue;
        }
        let phase = if x[0].norm() == R::zero() { Complex::one() } else { x[0] / x[0].norm() };
        let alpha = -phase * norm;
        let mut v = x.clone();
        v[0] = v[0] - alpha;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<R>().sqrt();
        if vn == R::zero() {
            continue;
        }
        for z in v.iter_mut() {
            *z = *z / vn;
        }
        let two = R::lit(2.0);
        // H <- (I - 2 v v*) H
        for j in 0..n {
            let s: Complex<R> = v.iter().enumerate().fold(Complex::zero(), |acc, (t, &vi)| acc + vi.conj() * h[(k + 1 + t, j)]);
            for (t, &vi) in v.iter().enumerate() {
                h[(k + 1 + t, j)] = h[(k + 1 + t, j)] - vi * s * two;
            }
        }
        // H <- H (I - 2 v v*)
        for i in 0..n {
            let s: Complex<R> = v.iter().enumerate().fold(Complex::zero(), |acc, (t, &vi)| acc + h[(i, k + 1 + t)] * vi);
            for (t, &vi) in v.iter().enumerate() {
                h[(i, k + 1 + t)] = h[(i, k + 1 + t)] - s * vi.conj() * two;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Complex::zero();
        }
    }
}

/// Unitary rotation `[[c, s], [-conj(s), c]]` sending `(x, y)` to `(r, 0)`.
fn givens<R: Real>(x: Complex<R>, y: Complex<R>) -> (R, Complex<R>) {
    let ax = x.norm();
    let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
    if r == R::zero() {
        return (R::one(), Complex::zero());
    }
    if ax == R::zero() {
        return (R::zero(), Complex::one());
    }
    (ax / r, (x / ax) * y.conj() / r)
}

/// All eigenvalues of a square complex matrix.
pub fn eigenvalues<R: Real>(a: &Matrix<R>) -> Result<Vec<Complex<R>>> {
    assert!(a.is_square());
    let n = a.rows();
    let mut h = a.clone();
    householder_hessenberg(&mut h);
    let mut out = Vec::with_capacity(n);
    let ulp = R::epsilon();
    let mut hi = n as isize - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi >= 0 {
        let hiu = hi as usize;
        if hiu == 0 {
            out.push(h[(0, 0)]);
            break;
        }
        let mut l = hiu;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let s = if s == R::zero() { a.max_abs().max(R::min_positive_value()) } else { s };
            if h[(l, l - 1)].norm() <= ulp * s {
                h[(l, l - 1)] = Complex::zero();
                break;
            }
            l -= 1;
        }
        if l == hiu {
            out.push(h[(hiu, hiu)]);
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 200 * n.max(4) {
            return Err(Error::Singular);
        }
        let (p, q, r, s) = (h[(hiu - 1, hiu - 1)], h[(hiu - 1, hiu)], h[(hiu, hiu - 1)], h[(hiu, hiu)]);
        let mu = if iter % 11 == 10 {
            s + Complex::new(h[(hiu, hiu - 1)].norm() * R::lit(0.75), h[(hiu, hiu - 1)].norm() * R::lit(0.4))
        } else {
            let half = R::lit(0.5);
            let m = (p + s) * half;
            let disc = ((p - s) * (p - s) * R::lit(0.25) + q * r).sqrt();
            let (m1, m2) = (m + disc, m - disc);
            if (m1 - s).norm() < (m2 - s).norm() {
                m1
            } else {
                m2
            }
        };
        for k in l..=hiu {
            h[(k, k)] = h[(k, k)] - mu;
        }
        let mut rots = Vec::with_capacity(hiu - l);
        for k in l..hiu {
            let (c, sn) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hiu {
                let (x, y) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = x * c + sn * y;
                h[(k + 1, j)] = -sn.conj() * x + y * c;
            }
            rots.push((c, sn));
        }
        for (idx, &(c, sn)) in rots.iter().enumerate() {
            let k = l + idx;
            for i in l..=(k + 1).min(hiu) {
                let (x, y) = (h[(i, k)], h[(i, k + 1)]);
                h[(i, k)] = x * c + y * sn.conj();
                h[(i, k + 1)] = -x * sn + y * c;
            }
        }
        for k in l..=hiu {
            h[(k, k)] = h[(k, k)] + mu;
        }
    }
    Ok(out)
}

pub fn poly_eval<R: Real>(coeffs: &[Complex<R>], x: Complex<R>) -> Complex<R> {
    coeffs.iter().rev().fold(Complex::zero(), |acc, &c| acc * x + c)
}

fn poly_eval_deriv<R: Real>(coeffs: &[Complex<R>], x: Complex<R>) -> (Complex<R>, Complex<R>) {
    let mut p = Complex::zero();
    let mut dp = Complex::zero();
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Roots of `sum_i coeffs[i] x^i`, with multiplicity.
///
/// Leading coefficients of modulus at most `eps * max|coeff|` are dropped
/// before solving, so the returned list may be shorter than the nominal
/// degree.
pub fn poly_roots<R: Real>(coeffs: &[Complex<R>], eps: R) -> Result<Vec<Complex<R>>> {
    let scale = crate::linalg::max_abs(coeffs);
    if scale == R::zero() {
        return Ok(Vec::new());
    }
    let mut deg = coeffs.len() - 1;
    while deg > 0 && coeffs[deg].norm() <= eps * scale {
        deg -= 1;
    }
    if deg == 0 {
        return Ok(Vec::new());
    }
    let c = &coeffs[..=deg];
    let lead = c[deg];
    let comp = Matrix::from_fn(deg, deg, |i, j| {
        if j == deg - 1 {
            -c[i] / lead
        } else if i == j + 1 {
            Complex::one()
        } else {
            Complex::zero()
        }
    });
    let mut roots = eigenvalues(&comp)?;
    for z in roots.iter_mut() {
        for _ in 0..4 {
            let (p, dp) = poly_eval_deriv(c, *z);
            if dp.norm() == R::zero() {
                break;
            }
            let next = *z - p / dp;
            if poly_eval(c, next).norm() <= p.norm() {
                *z = next;
            } else {
                break;
            }
        }
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    fn close_sets(mut a: Vec<Complex<f64>>, b: &[Complex<f64>], tol: f64) -> bool {
        if a.len() != b.len() {
            return false;
        }
        for &z in b {
            let Some((i, _)) = a.iter().enumerate().find(|(_, w)| (**w - z).norm() < tol) else {
                return false;
            };
            a.swap_remove(i);
        }
        true
    }

    fn cubic_from_roots(r: [Complex<f64>; 3]) -> Vec<Complex<f64>> {
        let s1 = r[0] + r[1] + r[2];
        let s2 = r[0] * r[1] + r[0] * r[2] + r[1] * r[2];
        let s3 = r[0] * r[1] * r[2];
        vec![-s3, s2, -s1, cplx(1.0, 0.0)]
    }

    #[test]
    fn eigenvalues_of_triangular_and_rotation() {
        let a = Matrix::from_rows(
            &[vec![cplx(2., 0.), cplx(1., 0.)], vec![cplx(0., 0.), cplx(-3., 1.)]],
            2,
        );
        assert!(close_sets(eigenvalues(&a).unwrap(), &[cplx(2., 0.), cplx(-3., 1.)], 1e-12));
        let rot = Matrix::from_rows(&[vec![cplx(0., 0.), cplx(-1., 0.)], vec![cplx(1., 0.), cplx(0., 0.)]], 2);
        assert!(close_sets(eigenvalues(&rot).unwrap(), &[cplx(0., 1.), cplx(0., -1.)], 1e-12));
    }

    #[test]
    fn eigenvalues_match_similarity_transform() {
        // P diag(1, 2i, -1, 3) P^{-1} with a fixed non-unitary P
        let d = Matrix::diagonal(&[cplx(1., 0.), cplx(0., 2.), cplx(-1., 0.), cplx(3., 0.)]);
        let p = Matrix::from_fn(4, 4, |i, j| cplx(1.0 / (1.0 + i as f64 + j as f64), (i as f64 - j as f64) * 0.1));
        let a = p.matmul(&d).matmul(&p.inverse(1e-14).unwrap());
        let ev = eigenvalues(&a).unwrap();
        assert!(close_sets(ev, &[cplx(1., 0.), cplx(0., 2.), cplx(-1., 0.), cplx(3., 0.)], 1e-8));
    }

    #[test]
    fn cubic_roots_recovered() {
        let r = [cplx(1., 0.), cplx(-0.5, 0.866), cplx(2., -1.)];
        let roots = poly_roots(&cubic_from_roots(r), 1e-12).unwrap();
        assert!(close_sets(roots, &r, 1e-12));
    }

    #[test]
    fn degree_drops_on_vanishing_leading_coefficient() {
        let roots = poly_roots(&[cplx(-2., 0.), cplx(1., 0.), cplx(0., 0.)], 1e-12).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - cplx(2., 0.)).norm() < 1e-14);
    }
}
