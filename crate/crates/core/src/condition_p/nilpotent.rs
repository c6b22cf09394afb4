//! Nilpotent algebras: condition P holds exactly for `ZN^k + C^{n-k}`.

use num_complex::Complex;
use num_traits::One;

use super::{find_null_square, mapped_witness, CanonicalForm, PBudget, PDecision, Route, Verdict};
use crate::algebra::{BasisChange, Element, EvolutionAlgebra};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::nilpotency::{is_nilpotent, is_zn_form};
use crate::scalar::{Real, Tolerance};

/// Coefficients `c[l][i]` (rows `1..k`, radical columns `i >= k`) such that
/// `g_l = f_l + sum_i c[l][i] f_i` removes every radical coordinate from
/// `g_r^2` except `g_{k-1}^2 = f_k`. Expects `a` normalized: strictly upper
/// triangular, rows `0..k` nonzero with unit superdiagonal, `f_{k-1}^2 = f_k`.
pub fn radical_elimination<R: Real>(a: &Matrix<R>, k: usize) -> Matrix<R> {
    let n = a.rows();
    let mut c = Matrix::zeros(n, n);
    for r in (0..k.saturating_sub(1)).rev() {
        for i in k..n {
            let mut v = a[(r, i)];
            for l in r + 2..k {
                v = v - a[(r, l)] * c[(l, i)];
            }
            c[(r + 1, i)] = v;
        }
    }
    c
}

pub fn decide_p_nilpotent<R: Real>(alg: &EvolutionAlgebra<R>, budget: &PBudget, tol: &Tolerance<R>) -> Result<PDecision<R>> {
    let (nil, order) = is_nilpotent(alg, tol);
    if !nil {
        return Err(Error::NotNilpotent);
    }
    let n = alg.dim();
    let order = order.expect("nilpotent algebras have an order");
    let nonzero = alg.nonzero_rows(tol);
    // sinks can always go last, so nonzero squares come first
    let perm: Vec<usize> = order
        .iter()
        .copied()
        .filter(|i| nonzero.contains(i))
        .chain(order.iter().copied().filter(|i| !nonzero.contains(i)))
        .collect();
    let k = nonzero.len();
    let t0 = BasisChange::permutation(&perm);
    let b0 = alg.apply_basis_change(&t0, tol)?;
    let mut decision = PDecision::new(Route::Nilpotent);
    if k == 0 {
        decision.verdict = Verdict::Satisfies;
        decision.canonical = Some(CanonicalForm { k: 1, matrix: alg.clone(), change: BasisChange::identity(n) });
        return Ok(decision);
    }
    if b0.rank_of_structure_matrix(tol) < k {
        let x = find_null_square(&b0, tol).expect("dependent rows give a null square");
        decision.verdict = Verdict::Fails;
        decision.witness = mapped_witness(alg, &t0, &[x], budget, tol);
        return Ok(decision);
    }
    let scale = b0.scale();
    let a = b0.structure();
    if let Some(t) = (0..k - 1).rev().find(|&i| tol.is_zero(a[(i, i + 1)], scale)) {
        // the chain breaks after t
        let mut gens = vec![Element::basis(n, t).add(&Element::basis(n, t + 1))];
        gens.extend((t + 2..n).map(|i| Element::basis(n, i)));
        decision.verdict = Verdict::Fails;
        decision.witness = mapped_witness(alg, &t0, &gens, budget, tol);
        return Ok(decision);
    }
    // the last nonzero square becomes the new coordinate k
    let w = a.row(k - 1).to_vec();
    let p = (k..n).max_by(|&x, &y| w[x].norm().partial_cmp(&w[y].norm()).unwrap()).expect("a zero row exists");
    let mut t1 = Matrix::identity(n);
    t1.row_mut(k).copy_from_slice(&w);
    if p != k {
        t1.row_mut(p).copy_from_slice(Element::basis(n, k).coords());
    }
    let t1 = BasisChange::for_algebra(&b0, t1, tol)?;
    let b1 = b0.apply_basis_change(&t1, tol)?;
    // unit superdiagonal from the end of the chain backwards
    let mut lambda = vec![Complex::<R>::one(); n];
    for i in (0..k).rev() {
        lambda[i] = (lambda[i + 1] / b1.entry(i, i + 1)).sqrt();
    }
    let t2 = BasisChange::diagonal(&lambda);
    let b2 = b1.apply_basis_change(&t2, tol)?;
    let c = radical_elimination(b2.structure(), k);
    let mut t3 = Matrix::identity(n);
    for l in 1..k {
        for i in k..n {
            t3[(l, i)] = c[(l, i)];
        }
    }
    let t3 = BasisChange::for_algebra(&b2, t3, tol)?;
    let change = t0.then(&t1).then(&t2).then(&t3);
    let matrix = alg.apply_basis_change(&change, tol)?;
    let block: Vec<usize> = (0..=k).collect();
    let ms = matrix.scale();
    let tail_zero = (0..n).all(|i| (0..n).all(|j| (i <= k && j <= k) || tol.is_zero(matrix.entry(i, j), ms)));
    let lead = EvolutionAlgebra::new(matrix.structure().select(&block, &block))?;
    if tail_zero && is_zn_form(&lead, tol) {
        decision.verdict = Verdict::Satisfies;
        decision.canonical = Some(CanonicalForm { k: k + 1, matrix, change });
    }
    Ok(decision)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;
    use crate::condition_p::PBudget;
    use crate::natural_basis::SubspaceKind;
    use crate::permutation::en;
    use crate::random::{random_natural_change, rng_for};
    use crate::scalar::cplx;

    type A = EvolutionAlgebra<f64>;

    fn tol() -> Tolerance<f64> {
        Tolerance::default()
    }

    #[test]
    fn en3_plus_c2() {
        let alg = en::<f64>(3).direct_sum(&A::abelian(2));
        let d = decide_p_nilpotent(&alg, &PBudget::default(), &tol()).unwrap();
        assert_eq!(d.verdict, Verdict::Satisfies);
        let cf = d.canonical.unwrap();
        assert_eq!(cf.k, 3);
        assert!(alg.apply_basis_change(&cf.change, &tol()).unwrap().structure().max_diff(cf.matrix.structure()) < 1e-12);
    }

    #[test]
    fn en2_plus_en2_fails() {
        let alg = en::<f64>(2).direct_sum(&en(2));
        let d = decide_p_nilpotent(&alg, &PBudget::default(), &tol()).unwrap();
        assert_eq!(d.verdict, Verdict::Fails);
        let w = d.witness.unwrap();
        assert!(w.class.kind.is_non_extendable_subalgebra());
    }

    #[test]
    fn rank_deficient_null_square() {
        let alg = A::from_real_rows(&[&[0., 0., 1.], &[0., 0., -1.], &[0., 0., 0.]]).unwrap();
        let d = decide_p_nilpotent(&alg, &PBudget::default(), &tol()).unwrap();
        assert_eq!(d.verdict, Verdict::Fails);
        let w = d.witness.unwrap();
        assert!(w.subspace.contains(&Element::from_real(&[1., 1., 0.]), &tol()));
        assert_eq!(w.class.kind, SubspaceKind::EvolutionSubalgebraNotExtendable);
    }

    #[test]
    fn not_nilpotent_is_an_error() {
        let alg = A::from_real_rows(&[&[1., 0.], &[0., 0.]]).unwrap();
        assert_eq!(decide_p_nilpotent(&alg, &PBudget::default(), &tol()), Err(Error::NotNilpotent));
    }

    #[test]
    fn scrambled_chain_with_radical_tail() {
        // rows 0..3 nonzero with full upper entries, radical of dimension 3
        let alg = A::from_real_rows(&[
            &[0., 2., 1., -1., 0.5, 3., 1.],
            &[0., 0., -3., 2., 1., 0., 2.],
            &[0., 0., 0., 0.5, 1., -1., 1.],
            &[0., 0., 0., 0., 2., 1., -2.],
            &[0.; 7],
            &[0.; 7],
            &[0.; 7],
        ])
        .unwrap();
        let mut rng = rng_for(5, 0);
        let scram = random_natural_change(&mut rng, 7);
        let alg = alg.apply_basis_change(&scram, &tol()).unwrap();
        let d = decide_p_nilpotent(&alg, &PBudget::default(), &tol()).unwrap();
        assert_eq!(d.verdict, Verdict::Satisfies);
        let cf = d.canonical.unwrap();
        assert_eq!(cf.k, 5);
        let again = alg.apply_basis_change(&cf.change, &tol()).unwrap();
        assert!(again.structure().max_diff(cf.matrix.structure()) < 1e-9);
    }

    /// Closed-form elimination coefficients, one-based:
    /// coefficient of `e_i'` in `e_j''` for `2 <= j <= k`, `k+2 <= i <= n`.
    fn closed_form(a: &Matrix<f64>, k: usize, j: usize, i: usize) -> Complex<f64> {
        let at = |r: usize, c: usize| a[(r - 1, c - 1)];
        let mut v = at(j - 1, i);
        for t in j..k {
            let mut inner = Complex::zero();
            for p in 1..=t - j + 1 {
                let mut prod = Complex::one();
                for h in 1..=p {
                    prod *= at(j - 2 + h, t + 1 - p + h);
                }
                inner += prod * if p % 2 == 0 { 1.0 } else { -1.0 };
            }
            v += at(t, i) * inner;
        }
        v
    }

    #[test]
    fn long_chains_reach_zn_form() {
        for k in 5..=7 {
            let n = k + 3;
            let a = normalized(k, n, 40 + k as u64);
            let alg = A::new(a).unwrap();
            let d = decide_p_nilpotent(&alg, &PBudget::default(), &tol()).unwrap();
            assert_eq!(d.verdict, Verdict::Satisfies, "k={k}");
            assert_eq!(d.canonical.unwrap().k, k + 1);
        }
    }

    fn normalized(k: usize, n: usize, seed: u64) -> Matrix<f64> {
        let mut rng = rng_for(seed, 1);
        let mut a = Matrix::zeros(n, n);
        for r in 0..k {
            for c in r + 1..n {
                a[(r, c)] = crate::random::complex_gaussian(&mut rng);
            }
            a[(r, r + 1)] = cplx(1., 0.);
        }
        for c in k + 1..n {
            a[(k - 1, c)] = Complex::zero();
        }
        a
    }

    #[test]
    fn elimination_matches_closed_form_for_short_chains() {
        for k in 2..=4 {
            for seed in 0..5 {
                let n = k + 4;
                let a = normalized(k, n, seed);
                let c = radical_elimination(&a, k);
                for j in 2..=k {
                    for i in k + 2..=n {
                        let want = closed_form(&a, k, j, i);
                        assert!((c[(j - 1, i - 1)] - want).norm() < 1e-12, "k={k} j={j} i={i}");
                    }
                }
            }
        }
    }
}
