//! Evolution algebras in a fixed natural basis, their elements and
//! subspaces, and natural basis changes.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{max_abs, Matrix};
use crate::scalar::{Real, Tolerance};

/// Coordinate vector of an element in the current natural basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Element<R> {
    coords: Vec<Complex<R>>,
}

impl<R: Real> Element<R> {
    pub fn new(coords: Vec<Complex<R>>) -> Self {
        Self { coords }
    }

    pub fn zero(n: usize) -> Self {
        Self { coords: vec![Complex::zero(); n] }
    }

    /// The natural basis vector `e_i` (0-based).
    pub fn basis(n: usize, i: usize) -> Self {
        let mut e = Self::zero(n);
        e.coords[i] = Complex::one();
        e
    }

    pub fn from_real(v: &[f64]) -> Self {
        Self { coords: v.iter().map(|&x| Complex::new(R::lit(x), R::zero())).collect() }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex<R>] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<Complex<R>> {
        self.coords
    }

    pub fn max_abs(&self) -> R {
        max_abs(&self.coords)
    }

    pub fn is_zero(&self, tol: &Tolerance<R>) -> bool {
        self.coords.iter().all(|&z| tol.is_zero(z, R::one()))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { coords: self.coords.iter().zip(&other.coords).map(|(&a, &b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { coords: self.coords.iter().zip(&other.coords).map(|(&a, &b)| a - b).collect() }
    }

    pub fn scale(&self, s: Complex<R>) -> Self {
        Self { coords: self.coords.iter().map(|&a| a * s).collect() }
    }

    /// Indices whose coordinate exceeds `thr` in modulus.
    pub fn support(&self, thr: R) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.coords[i].norm() > thr).collect()
    }
}

/// Finite-dimensional evolution algebra given by its structure matrix:
/// row `i` holds the coordinates of `e_i * e_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionAlgebra<R> {
    structure: Matrix<R>,
}

impl<R: Real> EvolutionAlgebra<R> {
    pub fn new(structure: Matrix<R>) -> Result<Self> {
        if !structure.is_square() {
            return Err(Error::NotSquare { rows: structure.rows(), cols: structure.cols() });
        }
        if structure.rows() == 0 {
            return Err(Error::EmptyAlgebra);
        }
        for i in 0..structure.rows() {
            for j in 0..structure.cols() {
                let z = structure[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self { structure })
    }

    pub fn from_rows(rows: &[Vec<Complex<R>>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare { rows: n, cols: bad.len() });
        }
        Self::new(Matrix::from_rows(rows, n))
    }

    /// Convenience constructor from real entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex<R>>> =
            rows.iter().map(|r| r.iter().map(|&x| Complex::new(R::lit(x), R::zero())).collect()).collect();
        Self::from_rows(&rows)
    }

    /// The `n`-dimensional algebra with zero multiplication.
    pub fn abelian(n: usize) -> Self {
        Self { structure: Matrix::zeros(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.structure.rows()
    }

    pub fn structure(&self) -> &Matrix<R> {
        &self.structure
    }

    pub fn entry(&self, i: usize, k: usize) -> Complex<R> {
        self.structure[(i, k)]
    }

    /// `e_i * e_i` as an element.
    pub fn square_of_basis(&self, i: usize) -> Element<R> {
        Element::new(self.structure.row(i).to_vec())
    }

    pub fn scale(&self) -> R {
        self.structure.max_abs()
    }

    fn check_dim(&self, x: &Element<R>) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.dim() });
        }
        Ok(())
    }

    /// `(x*y)_k = sum_i x_i y_i a_{i,k}`.
    pub fn multiply(&self, x: &Element<R>, y: &Element<R>) -> Result<Element<R>> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(self.multiply_coords(x.coords(), y.coords()))
    }

    pub(crate) fn multiply_coords(&self, x: &[Complex<R>], y: &[Complex<R>]) -> Element<R> {
        let w: Vec<Complex<R>> = x.iter().zip(y).map(|(&a, &b)| a * b).collect();
        Element::new(self.structure.vec_mul(&w))
    }

    pub fn square(&self, x: &Element<R>) -> Result<Element<R>> {
        self.multiply(x, x)
    }

    /// Block-diagonal direct sum; `self` occupies the leading coordinates.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (n, m) = (self.dim(), other.dim());
        let s = Matrix::from_fn(n + m, n + m, |i, j| {
            if i < n && j < n {
                self.structure[(i, j)]
            } else if i >= n && j >= n {
                other.structure[(i - n, j - n)]
            } else {
                Complex::zero()
            }
        });
        Self { structure: s }
    }

    /// Indices `i` with `e_i * e_i != 0`.
    pub fn nonzero_rows(&self, tol: &Tolerance<R>) -> Vec<usize> {
        let scale = self.scale();
        (0..self.dim()).filter(|&i| self.structure.row(i).iter().any(|&z| !tol.is_zero(z, scale))).collect()
    }

    /// Numerical rank of the structure matrix, pivot threshold
    /// `eps * max|a_{ik}|`.
    pub fn rank_of_structure_matrix(&self, tol: &Tolerance<R>) -> usize {
        self.structure.rank_rel(tol.eps())
    }

    /// Product space `U * V`, spanned by the products of basis rows.
    pub fn subspace_product(&self, u: &Subspace<R>, v: &Subspace<R>, tol: &Tolerance<R>) -> Subspace<R> {
        let ub = u.basis();
        let vb = v.basis();
        let mut gens = Vec::with_capacity(ub.len() * vb.len());
        for a in &ub {
            for b in &vb {
                gens.push(self.multiply_coords(a.coords(), b.coords()));
            }
        }
        Subspace::span(self.dim(), &gens, tol)
    }

    /// Smallest subalgebra containing `generators`.
    pub fn closure(&self, generators: &[Element<R>], tol: &Tolerance<R>) -> Result<Subspace<R>> {
        for g in generators {
            self.check_dim(g)?;
        }
        let mut s = Subspace::span(self.dim(), generators, tol);
        loop {
            let basis = s.basis();
            let mut gens = basis.clone();
            for i in 0..basis.len() {
                for j in i..basis.len() {
                    gens.push(self.multiply_coords(basis[i].coords(), basis[j].coords()));
                }
            }
            let next = Subspace::span(self.dim(), &gens, tol);
            if next.rank() == s.rank() {
                return Ok(s);
            }
            s = next;
        }
    }

    /// Whether every product of basis rows of `s` lies in `s`.
    pub fn is_subalgebra(&self, s: &Subspace<R>, tol: &Tolerance<R>) -> bool {
        let basis = s.basis();
        for i in 0..basis.len() {
            for j in i..basis.len() {
                let p = self.multiply_coords(basis[i].coords(), basis[j].coords());
                if !s.contains(&p, tol) {
                    return false;
                }
            }
        }
        true
    }

    /// Largest `|f_i * f_j|` over `i != j` for the rows of `t`, with its
    /// location.
    pub fn naturality_defect(&self, t: &Matrix<R>) -> (usize, usize, R) {
        let mut worst = (0, 0, R::zero());
        for i in 0..t.rows() {
            for j in i + 1..t.rows() {
                let m = self.multiply_coords(t.row(i), t.row(j)).max_abs();
                if m > worst.2 {
                    worst = (i, j, m);
                }
            }
        }
        worst
    }

    /// Structure matrix in the basis `f_i = sum_j t_{ij} e_j`.
    pub fn apply_basis_change(&self, change: &BasisChange<R>, tol: &Tolerance<R>) -> Result<Self> {
        let t = change.matrix();
        let n = self.dim();
        if t.rows() != n {
            return Err(Error::DimensionMismatch { expected: n, found: t.rows() });
        }
        if t.rank_rel(tol.eps()) < n {
            return Err(Error::Singular);
        }
        let (i, j, m) = self.naturality_defect(t);
        let tscale = t.max_abs();
        if m > tol.threshold(self.scale() * tscale * tscale) {
            return Err(Error::NotNatural { i, j, magnitude: m.to_f64().unwrap_or(f64::NAN) });
        }
        // row i of q: coordinates of f_i^2 in the old basis
        let q = Matrix::from_fn(n, n, |_, _| Complex::zero());
        let mut q = q;
        for r in 0..n {
            let sq = self.multiply_coords(t.row(r), t.row(r));
            q.row_mut(r).copy_from_slice(sq.coords());
        }
        // new coordinates c solve c^T T = q^T
        let x = t.transpose().solve(&q.transpose(), R::epsilon())?;
        Self::new(x.transpose())
    }
}

/// Linear subspace stored as reduced row-echelon rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace<R> {
    ambient_dim: usize,
    echelon: Matrix<R>,
    pivots: Vec<usize>,
}

impl<R: Real> Subspace<R> {
    pub fn zero(n: usize) -> Self {
        Self { ambient_dim: n, echelon: Matrix::zeros(0, n), pivots: Vec::new() }
    }

    pub fn full(n: usize) -> Self {
        Self { ambient_dim: n, echelon: Matrix::identity(n), pivots: (0..n).collect() }
    }

    /// Span of the given vectors.
    pub fn span(n: usize, vectors: &[Element<R>], tol: &Tolerance<R>) -> Self {
        if vectors.is_empty() {
            return Self::zero(n);
        }
        let rows: Vec<Vec<Complex<R>>> = vectors.iter().map(|v| v.coords().to_vec()).collect();
        let m = Matrix::from_rows(&rows, n);
        let (echelon, pivots) = m.rref(tol.threshold(m.max_abs()));
        Self { ambient_dim: n, echelon, pivots }
    }

    /// Span of the standard basis vectors with the given indices.
    pub fn coordinate(n: usize, indices: &[usize]) -> Self {
        let v: Vec<Element<R>> = indices.iter().map(|&i| Element::basis(n, i)).collect();
        Self::span(n, &v, &Tolerance::default())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn echelon(&self) -> &Matrix<R> {
        &self.echelon
    }

    pub fn basis(&self) -> Vec<Element<R>> {
        (0..self.rank()).map(|i| Element::new(self.echelon.row(i).to_vec())).collect()
    }

    /// Component of `v` not captured by the echelon rows.
    pub fn residual(&self, v: &Element<R>) -> Element<R> {
        let mut r = v.coords().to_vec();
        for (row, &p) in self.pivots.iter().enumerate() {
            let c = r[p];
            if c.is_zero() {
                continue;
            }
            for (x, &b) in r.iter_mut().zip(self.echelon.row(row)) {
                *x = *x - c * b;
            }
        }
        Element::new(r)
    }

    pub fn contains(&self, v: &Element<R>, tol: &Tolerance<R>) -> bool {
        let scale = v.max_abs();
        self.residual(v).coords().iter().all(|&z| tol.is_zero(z, scale))
    }

    pub fn contains_subspace(&self, other: &Self, tol: &Tolerance<R>) -> bool {
        other.basis().iter().all(|v| self.contains(v, tol))
    }

    pub fn same_as(&self, other: &Self, tol: &Tolerance<R>) -> bool {
        self.rank() == other.rank() && self.contains_subspace(other, tol)
    }

    pub fn sum(&self, other: &Self, tol: &Tolerance<R>) -> Self {
        let mut v = self.basis();
        v.extend(other.basis());
        Self::span(self.ambient_dim, &v, tol)
    }

    pub fn intersection(&self, other: &Self, tol: &Tolerance<R>) -> Self {
        let (a, b) = (self.basis(), other.basis());
        if a.is_empty() || b.is_empty() {
            return Self::zero(self.ambient_dim);
        }
        let mut rows: Vec<Vec<Complex<R>>> = a.iter().map(|v| v.coords().to_vec()).collect();
        rows.extend(b.iter().map(|v| v.coords().iter().map(|&z| -z).collect::<Vec<_>>()));
        let stacked = Matrix::from_rows(&rows, self.ambient_dim).transpose();
        let ns = stacked.nullspace(tol.threshold(stacked.max_abs()));
        let gens: Vec<Element<R>> = ns
            .iter()
            .map(|c| {
                let mut x = Element::zero(self.ambient_dim);
                for (i, v) in a.iter().enumerate() {
                    x = x.add(&v.scale(c[i]));
                }
                x
            })
            .collect();
        Self::span(self.ambient_dim, &gens, tol)
    }

    /// Extends the echelon basis of `self` by standard vectors to a basis of
    /// the ambient space; returns only the added indices.
    pub fn complement_indices(&self) -> Vec<usize> {
        (0..self.ambient_dim).filter(|c| !self.pivots.contains(c)).collect()
    }
}

/// Change of natural basis `f_i = sum_j t_{ij} e_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisChange<R> {
    t: Matrix<R>,
    natural: bool,
}

impl<R: Real> BasisChange<R> {
    /// Wraps `t` after checking it is nonsingular; the naturality flag is
    /// left unset.
    pub fn new(t: Matrix<R>, tol: &Tolerance<R>) -> Result<Self> {
        if !t.is_square() {
            return Err(Error::NotSquare { rows: t.rows(), cols: t.cols() });
        }
        if t.rank_rel(tol.eps()) < t.rows() {
            return Err(Error::Singular);
        }
        Ok(Self { t, natural: false })
    }

    /// Like [`BasisChange::new`], and records whether the rows are pairwise
    /// null in `alg`.
    pub fn for_algebra(alg: &EvolutionAlgebra<R>, t: Matrix<R>, tol: &Tolerance<R>) -> Result<Self> {
        let mut c = Self::new(t, tol)?;
        let (_, _, m) = alg.naturality_defect(&c.t);
        let s = c.t.max_abs();
        c.natural = m <= tol.threshold(alg.scale() * s * s);
        Ok(c)
    }

    pub fn identity(n: usize) -> Self {
        Self { t: Matrix::identity(n), natural: true }
    }

    /// `f_i = e_{order[i]}`.
    pub fn permutation(order: &[usize]) -> Self {
        let n = order.len();
        let mut t = Matrix::zeros(n, n);
        for (i, &o) in order.iter().enumerate() {
            t[(i, o)] = Complex::one();
        }
        Self { t, natural: true }
    }

    /// `f_i = d_i e_i`; every `d_i` must be nonzero.
    pub fn diagonal(d: &[Complex<R>]) -> Self {
        Self { t: Matrix::diagonal(d), natural: true }
    }

    pub fn matrix(&self) -> &Matrix<R> {
        &self.t
    }

    pub fn is_natural(&self) -> bool {
        self.natural
    }

    pub fn dim(&self) -> usize {
        self.t.rows()
    }

    /// Basis vector `f_i` in old coordinates.
    pub fn vector(&self, i: usize) -> Element<R> {
        Element::new(self.t.row(i).to_vec())
    }

    /// First `self`, then `next` expressed in the `f` basis.
    pub fn then(&self, next: &Self) -> Self {
        Self { t: next.t.matmul(&self.t), natural: self.natural && next.natural }
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(Self { t: self.t.inverse(R::epsilon())?, natural: self.natural })
    }

    /// Old-basis coordinates of an element given in the new basis.
    pub fn to_old(&self, x: &Element<R>) -> Element<R> {
        Element::new(self.t.vec_mul(x.coords()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    type A = EvolutionAlgebra<f64>;
    type E = Element<f64>;

    fn tol() -> Tolerance<f64> {
        Tolerance::default()
    }

    #[test]
    fn multiply_examples() {
        let e2 = A::from_real_rows(&[&[1., 0.], &[1., 0.]]).unwrap();
        let x = E::new(vec![cplx(1., 0.), cplx(0., 1.)]);
        assert_eq!(e2.multiply(&x, &x).unwrap().max_abs(), 0.0);
        let e4 = A::from_real_rows(&[&[0., 1.], &[0., 0.]]).unwrap();
        assert_eq!(e4.multiply(&E::basis(2, 0), &E::basis(2, 0)).unwrap(), E::from_real(&[0., 1.]));
        assert_eq!(e4.multiply(&E::basis(2, 0), &E::basis(2, 1)).unwrap(), E::zero(2));
        assert_eq!(
            e4.multiply(&E::basis(3, 0), &E::basis(2, 0)),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        );
    }

    #[test]
    fn direct_sum_examples() {
        let e4 = A::from_real_rows(&[&[0., 1.], &[0., 0.]]).unwrap();
        let two_chains = A::from_real_rows(&[&[0., 1., 0., 0.], &[0.; 4], &[0., 0., 0., 1.], &[0.; 4]]).unwrap();
        assert_eq!(e4.direct_sum(&e4), two_chains);
        let es1 = A::from_real_rows(&[&[1.]]).unwrap();
        let s = es1.direct_sum(&A::abelian(2));
        assert_eq!(s, A::from_real_rows(&[&[1., 0., 0.], &[0.; 3], &[0.; 3]]).unwrap());
    }

    #[test]
    fn closure_examples() {
        let e4 = A::from_real_rows(&[&[0., 1.], &[0., 0.]]).unwrap();
        assert!(e4.closure(&[E::basis(2, 0)], &tol()).unwrap().same_as(&Subspace::full(2), &tol()));
        assert_eq!(e4.closure(&[], &tol()).unwrap().rank(), 0);
        let e3 = A::from_real_rows(&[&[1., 1.], &[-1., -1.]]).unwrap();
        let c = e3.closure(&[E::from_real(&[1., 1.])], &tol()).unwrap();
        assert_eq!(c.rank(), 1);
        assert!(c.contains(&E::from_real(&[1., 1.]), &tol()));
    }

    #[test]
    fn subalgebra_examples() {
        let no_basis = A::from_real_rows(&[&[1., 1., 0.], &[-1., -1., 0.], &[0., 1., 1.]]).unwrap();
        let s = Subspace::span(3, &[E::from_real(&[1., 1., 0.]), E::from_real(&[0., 1., 1.])], &tol());
        assert!(no_basis.is_subalgebra(&s, &tol()));
        assert!(no_basis.is_subalgebra(&Subspace::full(3), &tol()));
        assert!(!no_basis.is_subalgebra(&Subspace::coordinate(3, &[0]), &tol()));
    }

    #[test]
    fn basis_change_examples() {
        let en2 = A::from_real_rows(&[&[0., 1.], &[0., 0.]]).unwrap();
        assert_eq!(en2.apply_basis_change(&BasisChange::identity(2), &tol()).unwrap(), en2);
        let swapped = en2.apply_basis_change(&BasisChange::permutation(&[1, 0]), &tol()).unwrap();
        assert_eq!(swapped, A::from_real_rows(&[&[0., 0.], &[1., 0.]]).unwrap());
        // e_1^2 = a e_2 normalized by t_11 = a^{-1/2}
        let a = cplx(3.0, -2.0);
        let chain = A::from_rows(&[vec![cplx(0., 0.), a], vec![cplx(0., 0.); 2]]).unwrap();
        let t = BasisChange::diagonal(&[a.powf(-0.5), cplx(1., 0.)]);
        let normalized = chain.apply_basis_change(&t, &tol()).unwrap();
        assert!(normalized.structure().max_diff(en2.structure()) < 1e-12);
    }

    #[test]
    fn basis_change_errors() {
        let e2 = A::from_real_rows(&[&[1., 0.], &[1., 0.]]).unwrap();
        let shear = Matrix::from_rows(&[vec![cplx(1., 0.), cplx(1., 0.)], vec![cplx(0., 0.), cplx(1., 0.)]], 2);
        let c = BasisChange::new(shear, &tol()).unwrap();
        assert!(matches!(e2.apply_basis_change(&c, &tol()), Err(Error::NotNatural { .. })));
        let sing = Matrix::from_rows(&[vec![cplx(1., 0.), cplx(1., 0.)], vec![cplx(2., 0.), cplx(2., 0.)]], 2);
        assert_eq!(BasisChange::new(sing, &tol()), Err(Error::Singular));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(A::abelian(3).rank_of_structure_matrix(&tol()), 0);
        let not_extendable = A::from_real_rows(&[&[1., 1., 1.], &[-1., -1., 1.], &[0., 0., 0.]]).unwrap();
        assert_eq!(not_extendable.rank_of_structure_matrix(&tol()), 2);
        let e5 = A::from_real_rows(&[&[1., 2.], &[3., 1.]]).unwrap();
        assert_eq!(e5.rank_of_structure_matrix(&tol()), 2);
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(matches!(A::from_real_rows(&[&[1., 0.]]), Err(Error::NotSquare { .. })));
        assert!(matches!(A::from_real_rows(&[&[f64::NAN]]), Err(Error::NonFinite { row: 0, col: 0 })));
    }

    #[test]
    fn single_precision_works() {
        let en3 = EvolutionAlgebra::<f32>::from_real_rows(&[&[0., 1., 0.], &[0., 0., 1.], &[0., 0., 0.]]).unwrap();
        let t = Tolerance::default();
        let sq = en3.square(&Element::basis(3, 1)).unwrap();
        assert_eq!(sq, Element::basis(3, 2));
        let p = en3.apply_basis_change(&BasisChange::permutation(&[2, 0, 1]), &t).unwrap();
        assert_eq!(p.entry(1, 2), cplx(1., 0.));
    }
}
