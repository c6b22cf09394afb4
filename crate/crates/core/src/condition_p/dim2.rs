//! Two-dimensional algebras: normal forms `E1..E6` and condition P.

use num_complex::Complex;
use num_traits::{One, Zero};

use super::{candidate_witness, PBudget, PDecision, Route, Verdict};
use crate::algebra::{Element, EvolutionAlgebra};
use crate::error::{Error, Result};
use crate::scalar::{lex_less, Real, Tolerance};

/// Isomorphism class of a two-dimensional evolution algebra.
///
/// `E5` parameters are ordered so that `(a2, a3)` is the lexicographically
/// smaller of the two swap-equivalent tuples; `E6` uses the smallest of the
/// three cube-root-of-unity rotations of `a4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dim2Class<R> {
    Abelian,
    E1,
    E2,
    E3,
    E4,
    E5 { a2: Complex<R>, a3: Complex<R> },
    E6 { a4: Complex<R> },
}

impl<R: Real> Dim2Class<R> {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Abelian => "Abelian",
            Self::E1 => "E1",
            Self::E2 => "E2",
            Self::E3 => "E3",
            Self::E4 => "E4",
            Self::E5 { .. } => "E5",
            Self::E6 { .. } => "E6",
        }
    }

    /// The normal-form algebra of the class.
    pub fn normal_form(&self) -> EvolutionAlgebra<R> {
        let o = Complex::<R>::one();
        let z = Complex::<R>::zero();
        let rows = match *self {
            Self::Abelian => [[z, z], [z, z]],
            Self::E1 => [[o, z], [z, z]],
            Self::E2 => [[o, z], [o, z]],
            Self::E3 => [[o, o], [-o, -o]],
            Self::E4 => [[z, o], [z, z]],
            Self::E5 { a2, a3 } => [[o, a2], [a3, o]],
            Self::E6 { a4 } => [[z, o], [o, a4]],
        };
        EvolutionAlgebra::from_rows(&rows.map(|r| r.to_vec())).expect("finite normal form")
    }

    pub fn satisfies_p(&self) -> bool {
        matches!(self, Self::Abelian | Self::E1 | Self::E4)
    }
}

fn check_dim2<R: Real>(alg: &EvolutionAlgebra<R>) -> Result<()> {
    if alg.dim() != 2 {
        return Err(Error::WrongDimension { expected: 2, found: alg.dim() });
    }
    Ok(())
}

fn canonical_e5<R: Real>(a2: Complex<R>, a3: Complex<R>, tie: R) -> Dim2Class<R> {
    if lex_less(a3, a2, tie) {
        Dim2Class::E5 { a2: a3, a3: a2 }
    } else {
        Dim2Class::E5 { a2, a3 }
    }
}

fn canonical_e6<R: Real>(a4: Complex<R>, tie: R) -> Dim2Class<R> {
    let third = R::lit(2.0) * R::PI() / R::lit(3.0);
    let mut best = a4;
    for k in 1..3 {
        let w = Complex::from_polar(R::one(), third * R::lit(k as f64));
        let cand = a4 * w;
        if lex_less(cand, best, tie) {
            best = cand;
        }
    }
    Dim2Class::E6 { a4: best }
}

pub fn classify_dim2<R: Real>(alg: &EvolutionAlgebra<R>, tol: &Tolerance<R>) -> Result<Dim2Class<R>> {
    check_dim2(alg)?;
    let scale = alg.scale();
    let a = alg.structure();
    let zero = |z: Complex<R>| tol.is_zero(z, scale);
    let tie = tol.spectral().threshold(scale);
    match alg.rank_of_structure_matrix(tol) {
        0 => Ok(Dim2Class::Abelian),
        1 => {
            let nz = alg.nonzero_rows(tol);
            // w spans E^2; decide whether w^2 vanishes
            let w = a.row(nz[0]).to_vec();
            let w2 = alg.multiply_coords(&w, &w);
            let w_sq_zero = w2.max_abs() <= tol.threshold(scale * scale * crate::linalg::max_abs(&w));
            Ok(match (nz.len(), w_sq_zero) {
                (1, false) => Dim2Class::E1,
                (1, true) => Dim2Class::E4,
                (_, false) => Dim2Class::E2,
                (_, true) => Dim2Class::E3,
            })
        }
        _ => {
            let (a11, a12, a21, a22) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
            if !zero(a11) && !zero(a22) {
                let a2 = a12 * a22 / (a11 * a11);
                let a3 = a21 * a11 / (a22 * a22);
                return Ok(canonical_e5(a2, a3, tie));
            }
            // put the vanishing diagonal entry first
            let (a12, a21, a22) = if zero(a11) { (a12, a21, a22) } else { (a21, a12, a11) };
            let lambda = (Complex::<R>::one() / (a12 * a12 * a21)).powf(R::one() / R::lit(3.0));
            let a4 = lambda * lambda * a12 * a22;
            Ok(canonical_e6(a4, tie))
        }
    }
}

pub(crate) fn idempotents_dim2<R: Real>(alg: &EvolutionAlgebra<R>, tol: &Tolerance<R>) -> Vec<Element<R>> {
    let a = alg.structure();
    let scale = alg.scale();
    let zero = |z: Complex<R>| tol.is_zero(z, scale);
    let (a11, a12, a21, a22) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let mut out: Vec<[Complex<R>; 2]> = Vec::new();
    if zero(a21) && zero(a12) {
        let roots = |d: Complex<R>| {
            let mut r = vec![Complex::<R>::zero()];
            if !zero(d) {
                r.push(Complex::<R>::one() / d);
            }
            r
        };
        for &x1 in &roots(a11) {
            for &x2 in &roots(a22) {
                out.push([x1, x2]);
            }
        }
    } else {
        // solve with the coordinate whose cross coefficient is nonzero
        let swap = zero(a21);
        let (b11, b12, b21, b22) = if swap { (a22, a21, a12, a11) } else { (a11, a12, a21, a22) };
        let c2 = b12 - b22 * b11 / b21;
        let c1 = b22 / b21;
        let two = R::lit(2.0);
        let cubic = [-Complex::one(), b21 * c1 * c1 + b11, (b21 * c2 * c1).scale(two), b21 * c2 * c2];
        if let Ok(roots) = crate::eigen::poly_roots(&cubic, tol.eps()) {
            for x in roots {
                let y = c2 * x * x + c1 * x;
                out.push(if swap { [y, x] } else { [x, y] });
            }
        }
    }
    let mut found: Vec<Element<R>> = Vec::new();
    for p in out {
        let x = Element::new(p.to_vec());
        if x.max_abs() <= tol.threshold(R::one()) {
            continue;
        }
        let defect = alg.multiply_coords(x.coords(), x.coords()).sub(&x).max_abs();
        let xs = x.max_abs();
        if defect > tol.spectral().threshold(scale * xs * xs + xs) {
            continue;
        }
        if !found.iter().any(|f| f.sub(&x).max_abs() <= tol.spectral().threshold(xs)) {
            found.push(x);
        }
    }
    found
}

pub fn decide_p_dim2<R: Real>(alg: &EvolutionAlgebra<R>, budget: &PBudget, tol: &Tolerance<R>) -> Result<PDecision<R>> {
    let class = classify_dim2(alg, tol)?;
    let mut decision = PDecision::new(Route::Dim2);
    decision.dim2 = Some(class);
    if class.satisfies_p() {
        decision.verdict = Verdict::Satisfies;
        return Ok(decision);
    }
    let mut candidates: Vec<Element<R>> = super::find_null_square(alg, tol).into_iter().collect();
    candidates.extend(idempotents_dim2(alg, tol));
    for x in candidates {
        if let Some(w) = candidate_witness(alg, &[x], budget, tol) {
            decision.verdict = Verdict::Fails;
            decision.witness = Some(w);
            return Ok(decision);
        }
    }
    Ok(decision)
}

/// `E5(a2, a3)` structure matrix.
pub fn e5<R: Real>(a2: Complex<R>, a3: Complex<R>) -> EvolutionAlgebra<R> {
    Dim2Class::E5 { a2, a3 }.normal_form()
}

/// `E6(a4)` structure matrix.
pub fn e6<R: Real>(a4: Complex<R>) -> EvolutionAlgebra<R> {
    Dim2Class::E6 { a4 }.normal_form()
}
