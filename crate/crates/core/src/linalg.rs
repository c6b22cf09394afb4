//! Dense complex matrices and the tolerance-aware elimination routines the
//! rest of the crate is built on.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<R> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<R>>,
}

impl<R: Real> Matrix<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<R>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row vectors; every row must have `cols` entries.
    pub fn from_rows(rows: &[Vec<Complex<R>>], cols: usize) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged row {i}");
            m.row_mut(i).copy_from_slice(r);
        }
        m
    }

    pub fn diagonal(d: &[Complex<R>]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex<R>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex<R>] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex<R>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<Complex<R>>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> &[Complex<R>] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(l, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex<R>]) -> Vec<Complex<R>> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(Complex::zero(), |acc, (&a, &b)| acc + a * b))
            .collect()
    }

    /// `v^T M`, i.e. the combination of rows with coefficients `v`.
    pub fn vec_mul(&self, v: &[Complex<R>]) -> Vec<Complex<R>> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![Complex::zero(); self.cols];
        for (i, &c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o = *o + c * a;
            }
        }
        out
    }

    pub fn scale(&self, s: Complex<R>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-Complex::one()))
    }

    pub fn max_abs(&self) -> R {
        max_abs(&self.data)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_diff(&self, other: &Self) -> R {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(&a, &b)| (a - b).norm()).fold(R::zero(), R::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Submatrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    /// Conjugation by a permutation: entry `(i, j)` of the result is entry
    /// `(order[i], order[j])` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        self.select(order, order)
    }

    /// Reduced row-echelon form with partial pivoting by largest magnitude.
    ///
    /// Entries of modulus at most `thr` are treated as zero. Returns the
    /// echelon matrix (zero rows dropped) and the pivot columns.
    pub fn rref(&self, thr: R) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let (best, mag) = (r..m.rows)
                .map(|i| (i, m[(i, c)].norm()))
                .fold((r, R::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if mag <= thr {
                for i in r..m.rows {
                    m[(i, c)] = Complex::zero();
                }
                continue;
            }
            m.swap_rows(r, best);
            let p = m[(r, c)];
            for x in m.row_mut(r) {
                *x = *x / p;
            }
            m[(r, c)] = Complex::one();
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m[(i, c)];
                if f.is_zero() {
                    continue;
                }
                for j in 0..m.cols {
                    let v = m[(r, j)];
                    m[(i, j)] = m[(i, j)] - f * v;
                }
                m[(i, c)] = Complex::zero();
            }
            pivots.push(c);
            r += 1;
        }
        m.data.truncate(r * m.cols);
        m.rows = r;
        (m, pivots)
    }

    /// Numerical rank with absolute pivot threshold `thr`.
    pub fn rank(&self, thr: R) -> usize {
        self.rref(thr).1.len()
    }

    /// Rank with pivot threshold `eps * max|entry|`.
    pub fn rank_rel(&self, eps: R) -> usize {
        let scale = self.max_abs();
        if scale == R::zero() {
            return 0;
        }
        self.rank(eps * scale)
    }

    /// Basis of the right null space `{x : M x = 0}` as column vectors.
    pub fn nullspace(&self, thr: R) -> Vec<Vec<Complex<R>>> {
        let (e, pivots) = self.rref(thr);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Complex::zero(); self.cols];
                v[f] = Complex::one();
                for (r, &p) in pivots.iter().enumerate() {
                    v[p] = -e[(r, f)];
                }
                v
            })
            .collect()
    }

    /// Solves `self * X = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &Self, eps: R) -> Result<Self> {
        assert!(self.is_square());
        assert_eq!(self.rows, rhs.rows);
        let n = self.rows;
        let thr = eps * self.max_abs();
        let mut a = self.clone();
        let mut b = rhs.clone();
        for c in 0..n {
            let (best, mag) = (c..n)
                .map(|i| (i, a[(i, c)].norm()))
                .fold((c, R::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if mag <= thr || mag == R::zero() {
                return Err(Error::Singular);
            }
            a.swap_rows(c, best);
            b.swap_rows(c, best);
            let p = a[(c, c)];
            for i in c + 1..n {
                let f = a[(i, c)] / p;
                if f.is_zero() {
                    continue;
                }
                for j in c..n {
                    let v = a[(c, j)];
                    a[(i, j)] = a[(i, j)] - f * v;
                }
                for j in 0..b.cols {
                    let v = b[(c, j)];
                    b[(i, j)] = b[(i, j)] - f * v;
                }
            }
        }
        let mut x = Self::zeros(n, b.cols);
        for j in 0..b.cols {
            for i in (0..n).rev() {
                let mut s = b[(i, j)];
                for l in i + 1..n {
                    s = s - a[(i, l)] * x[(l, j)];
                }
                x[(i, j)] = s / a[(i, i)];
            }
        }
        Ok(x)
    }

    pub fn inverse(&self, eps: R) -> Result<Self> {
        self.solve(&Self::identity(self.rows), eps)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl<R> Index<(usize, usize)> for Matrix<R> {
    type Output = Complex<R>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<R> {
        &self.data[i * self.cols + j]
    }
}

impl<R> IndexMut<(usize, usize)> for Matrix<R> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<R> {
        &mut self.data[i * self.cols + j]
    }
}

pub fn max_abs<R: Real>(v: &[Complex<R>]) -> R {
    v.iter().map(|z| z.norm()).fold(R::zero(), R::max)
}

pub fn dot<R: Real>(a: &[Complex<R>], b: &[Complex<R>]) -> Complex<R> {
    a.iter().zip(b).fold(Complex::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn axpy<R: Real>(alpha: Complex<R>, x: &[Complex<R>], y: &mut [Complex<R>]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

/// Bilinear form `u^T M v` (no conjugation).
pub fn bilinear<R: Real>(m: &Matrix<R>, u: &[Complex<R>], v: &[Complex<R>]) -> Complex<R> {
    dot(u, &m.mul_vec(v))
}
