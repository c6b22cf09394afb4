use super::*;
use crate::natural_basis::SubspaceKind;
use crate::permutation::{en, es};
use crate::random::{complex_annulus, rng_for};
use crate::scalar::cplx;

type A = EvolutionAlgebra<f64>;

fn tol() -> Tolerance<f64> {
    Tolerance::default()
}

fn budget() -> PBudget {
    PBudget::seeded(7)
}

/// Diagonal scaling by `(l, m)` and optional swap.
fn scramble(alg: &A, l: Complex<f64>, m: Complex<f64>, swap: bool) -> A {
    let mut ch = BasisChange::diagonal(&[l, m]);
    if swap {
        ch = ch.then(&BasisChange::permutation(&[1, 0]));
    }
    alg.apply_basis_change(&ch, &tol()).unwrap()
}

#[test]
fn classify_normal_forms() {
    let cases = [
        (Dim2Class::Abelian, "Abelian"),
        (Dim2Class::E1, "E1"),
        (Dim2Class::E2, "E2"),
        (Dim2Class::E3, "E3"),
        (Dim2Class::E4, "E4"),
    ];
    for (c, tag) in cases {
        assert_eq!(classify_dim2(&c.normal_form(), &tol()).unwrap().tag(), tag);
    }
    assert_eq!(
        classify_dim2(&A::from_real_rows(&[&[1., 0.], &[0., 0.]]).unwrap(), &tol()).unwrap(),
        Dim2Class::E1
    );
    assert!(classify_dim2(&A::abelian(3), &tol()).is_err());
}

#[test]
fn e5_scramble_keeps_parameters() {
    let alg = e5(cplx(2., 0.), cplx(3., 0.));
    for (i, swap) in [false, true].into_iter().enumerate() {
        let mut rng = rng_for(11, i as u64);
        let l = complex_annulus(&mut rng, 0.5, 2.0);
        let m = complex_annulus(&mut rng, 0.5, 2.0);
        match classify_dim2(&scramble(&alg, l, m, swap), &tol()).unwrap() {
            Dim2Class::E5 { a2, a3 } => {
                assert!((a2 - cplx(2., 0.)).norm() < 1e-9 && (a3 - cplx(3., 0.)).norm() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn e6_rotations_share_a_canonical_parameter() {
    let a4 = cplx(0.7, -1.3);
    let w = Complex::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let c0 = classify_dim2(&e6(a4), &tol()).unwrap();
    let c1 = classify_dim2(&e6(a4 * w), &tol()).unwrap();
    let (Dim2Class::E6 { a4: x }, Dim2Class::E6 { a4: y }) = (c0, c1) else { panic!() };
    assert!((x - y).norm() < 1e-9);
    let scrambled = scramble(&e6(a4), cplx(0.3, 1.1), cplx(-1.4, 0.2), true);
    let Dim2Class::E6 { a4: z } = classify_dim2(&scrambled, &tol()).unwrap() else { panic!() };
    assert!((x - z).norm() < 1e-9);
}

#[test]
fn rank_one_classes_survive_scrambling() {
    for c in [Dim2Class::E1, Dim2Class::E2, Dim2Class::E3, Dim2Class::E4] {
        let s = scramble(&c.normal_form(), cplx(1.5, -0.5), cplx(0.2, 0.9), true);
        assert_eq!(classify_dim2(&s, &tol()).unwrap(), c);
    }
}

#[test]
fn dim2_condition_p() {
    for c in [Dim2Class::Abelian, Dim2Class::E1, Dim2Class::E4] {
        assert_eq!(decide_p_dim2(&c.normal_form(), &budget(), &tol()).unwrap().verdict, Verdict::Satisfies);
    }
    let d = decide_p_dim2(&Dim2Class::E2.normal_form(), &budget(), &tol()).unwrap();
    assert_eq!(d.verdict, Verdict::Fails);
    let w = d.witness.unwrap();
    assert!(w.subspace.contains(&Element::new(vec![cplx(1., 0.), cplx(0., 1.)]), &tol()));
    for c in [Dim2Class::E3, Dim2Class::E5 { a2: cplx(2., 0.), a3: cplx(3., 0.) }, Dim2Class::E6 { a4: cplx(1., 1.) }] {
        let d = decide_p_dim2(&c.normal_form(), &budget(), &tol()).unwrap();
        assert_eq!(d.verdict, Verdict::Fails, "{c:?}");
        assert_eq!(d.witness.unwrap().class.certainty, Certainty::Proved);
    }
}

#[test]
fn null_squares() {
    let e2 = Dim2Class::<f64>::E2.normal_form();
    assert_eq!(find_null_square(&e2, &tol()), Some(Element::new(vec![cplx(1., 0.), cplx(0., 1.)])));
    assert_eq!(find_null_square(&A::abelian(2), &tol()), Some(Element::basis(2, 0)));
    assert_eq!(find_null_square(&e5(cplx(2., 0.), cplx(3., 0.)), &tol()), None);
}

#[test]
fn idempotents() {
    let e1 = Dim2Class::<f64>::E1.normal_form();
    assert!(find_idempotents(&e1, &TrackConfig::default(), &tol()).contains(&Element::basis(2, 0)));
    let found = find_idempotents(&es::<f64>(2), &TrackConfig::default(), &tol());
    assert!(found.iter().any(|x| x.sub(&Element::from_real(&[1., 1.])).max_abs() < 1e-9));
    let es3 = es::<f64>(3);
    let found = find_idempotents(&es3, &TrackConfig::default(), &tol());
    assert!(found.iter().any(|x| x.sub(&Element::from_real(&[1., 1., 1.])).max_abs() < 1e-9));
    for x in &found {
        assert!(es3.square(x).unwrap().sub(x).max_abs() < 1e-9);
    }
}

#[test]
fn permutation_route() {
    let d = decide_p(&es::<f64>(1).direct_sum(&en(2)).direct_sum(&A::abelian(1)), &budget(), &tol());
    assert_eq!((d.verdict, d.route), (Verdict::Satisfies, Route::Permutation));
    let d = decide_p(&es::<f64>(2).direct_sum(&A::abelian(1)), &budget(), &tol());
    assert_eq!(d.verdict, Verdict::Fails);
    assert!(d.witness.unwrap().subspace.contains(&Element::from_real(&[1., 1., 0.]), &tol()));
    let d = decide_p(&es::<f64>(1).direct_sum(&es(1)).direct_sum(&A::abelian(1)), &budget(), &tol());
    assert_eq!(d.verdict, Verdict::Fails);
    let d = decide_p(&es::<f64>(1).direct_sum(&en(2)).direct_sum(&en(2)), &budget(), &tol());
    assert_eq!(d.verdict, Verdict::Fails);
    assert_eq!(d.witness.unwrap().subspace.rank(), 2);
}

#[test]
fn two_chains_fail() {
    let a = A::from_real_rows(&[&[0., 1., 0., 0.], &[0.; 4], &[0., 0., 0., 1.], &[0.; 4]]).unwrap();
    let d = decide_p(&a, &budget(), &tol());
    assert_eq!(d.verdict, Verdict::Fails);
    let w = d.witness.unwrap();
    assert_eq!(w.class.certainty, Certainty::Proved);
    assert_ne!(w.class.kind, SubspaceKind::ExtendableEvolutionSubalgebra);
}

#[test]
fn abelian_split_route() {
    // E1 plus a radical coordinate mixed into the square of e1
    let a = A::from_real_rows(&[&[1., 0., 2.], &[0., 0., 0.], &[0., 0., 0.]]).unwrap();
    let scr = a.apply_basis_change(&BasisChange::permutation(&[2, 0, 1]), &tol()).unwrap();
    let d = decide_p(&scr, &budget(), &tol());
    assert_eq!(d.verdict, Verdict::Satisfies, "{d:?}");
    // E2 plus C: fails via the split
    let e2c = Dim2Class::<f64>::E2.normal_form().direct_sum(&A::abelian(1));
    let d = decide_p(&e2c, &budget(), &tol());
    assert_eq!(d.verdict, Verdict::Fails);
    assert_eq!(d.witness.unwrap().class.certainty, Certainty::Proved);
}

#[test]
fn split_abelian_shapes() {
    let a = A::from_real_rows(&[&[1., 1., 1.], &[0.; 3], &[0.; 3]]).unwrap();
    let (inner, j, change) = split_abelian(&a, &tol()).unwrap();
    assert_eq!((inner.dim(), j), (1, 2));
    assert!(change.is_natural());
    // e1^2 = e1 + e2 with e2^2 = e3 keeps e2 in the non-abelian part
    let b = A::from_real_rows(&[&[1., 1., 0., 1.], &[0., 0., 1., 0.], &[0.; 4], &[0.; 4]]).unwrap();
    let (inner, j, _) = split_abelian(&b, &tol()).unwrap();
    assert_eq!((inner.dim(), j), (3, 1));
    assert!(split_abelian(&A::from_real_rows(&[&[1., 0.], &[0., 1.]]).unwrap(), &tol()).is_none());
}

#[test]
fn heuristic_never_claims_satisfies() {
    let a = A::from_real_rows(&[&[1., 2., 0.], &[0., 1., 3.], &[1., 0., 1.]]).unwrap();
    let d = decide_p(&a, &budget(), &tol());
    assert_eq!(d.route, Route::Heuristic);
    assert_ne!(d.verdict, Verdict::Satisfies);
}
