//! Which of the three subalgebra conceptions a subspace satisfies:
//! ordinary subalgebra, subalgebra with a natural basis, and evolution
//! subalgebra whose natural basis extends to one of the whole algebra.
//!
//! A basis `u_1..u_m` of a subspace is natural exactly when the bilinear
//! forms `B^(k)_{pq} = (u_p * u_q)_k` are simultaneously diagonal, so the
//! search for a natural basis is a simultaneous congruence
//! diagonalization. Extension to the whole algebra is decided from the
//! row structure of the algebra itself (see [`RowGroups`]).

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;

use crate::algebra::{Element, EvolutionAlgebra, Subspace};
use crate::eigen::eigenvalues;
use crate::error::{Error, Result};
use crate::linalg::{bilinear, max_abs, Matrix};
use crate::random::{complex_gaussian, rng_for};
use crate::scalar::{Real, Tolerance};

/// Coordinate form of the product restricted to a subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearFamily<R> {
    m: usize,
    forms: Vec<Matrix<R>>,
}

impl<R: Real> BilinearFamily<R> {
    pub fn new(m: usize, forms: Vec<Matrix<R>>) -> Self {
        assert!(forms.iter().all(|f| f.rows() == m && f.cols() == m));
        Self { m, forms }
    }

    pub fn subspace_dim(&self) -> usize {
        self.m
    }

    pub fn forms(&self) -> &[Matrix<R>] {
        &self.forms
    }

    pub fn scale(&self) -> R {
        self.forms.iter().map(|f| f.max_abs()).fold(R::zero(), R::max)
    }

    /// Largest off-diagonal `|u_i^T B u_j|` over the family.
    pub fn off_diagonal_defect(&self, vectors: &[Vec<Complex<R>>]) -> R {
        let mut worst = R::zero();
        for f in &self.forms {
            for i in 0..vectors.len() {
                for j in i + 1..vectors.len() {
                    worst = worst.max(bilinear(f, &vectors[i], &vectors[j]).norm());
                }
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Certainty {
    Proved,
    HeuristicOnly,
}

/// Failure modes of the natural-basis searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("search budget exhausted without a decision")]
    Inconclusive,
    #[error("proved that no such basis exists")]
    ProvedNone,
}

/// Controls the randomized parts of the searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub trials: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { trials: 64, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum SubspaceKind {
    NotSubalgebra,
    SubalgebraNoNaturalBasis,
    EvolutionSubalgebraNotExtendable,
    ExtendableEvolutionSubalgebra,
}

impl SubspaceKind {
    /// True for the classes that are subalgebras without an extendable
    /// natural basis.
    pub fn is_non_extendable_subalgebra(self) -> bool {
        matches!(self, Self::SubalgebraNoNaturalBasis | Self::EvolutionSubalgebraNotExtendable)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceClass<R> {
    pub kind: SubspaceKind,
    pub certainty: Certainty,
    /// Natural basis of the subspace, when one was found.
    pub natural_basis: Option<Vec<Element<R>>>,
    /// Completion of `natural_basis` to a natural basis of the algebra.
    pub extension: Option<Vec<Element<R>>>,
}

/// Restricts the product of `alg` to `s`, using the echelon basis of `s`.
pub fn restrict_product<R: Real>(alg: &EvolutionAlgebra<R>, s: &Subspace<R>) -> Result<BilinearFamily<R>> {
    if s.ambient_dim() != alg.dim() {
        return Err(Error::DimensionMismatch { expected: alg.dim(), found: s.ambient_dim() });
    }
    Ok(restrict_to_vectors(alg, &s.basis()))
}

fn restrict_to_vectors<R: Real>(alg: &EvolutionAlgebra<R>, u: &[Element<R>]) -> BilinearFamily<R> {
    let m = u.len();
    if m == 0 {
        return BilinearFamily::new(0, Vec::new());
    }
    let n = alg.dim();
    let mut forms = vec![Matrix::zeros(m, m); n];
    for p in 0..m {
        for q in p..m {
            let prod = alg.multiply_coords(u[p].coords(), u[q].coords());
            for (k, &z) in prod.coords().iter().enumerate() {
                forms[k][(p, q)] = z;
                forms[k][(q, p)] = z;
            }
        }
    }
    BilinearFamily::new(m, forms)
}

fn normalize<R: Real>(v: &mut [Complex<R>]) {
    let s = max_abs(v);
    if s > R::zero() {
        for z in v.iter_mut() {
            *z = *z / s;
        }
    }
}

/// Basis of `span(vs)` that is orthogonal and non-isotropic for the
/// symmetric form `c`, or `None` when the restricted form is degenerate.
pub(crate) fn c_orthogonal_basis<R: Real>(
    c: &Matrix<R>,
    vs: Vec<Vec<Complex<R>>>,
    thr: R,
) -> Option<Vec<Vec<Complex<R>>>> {
    let imag = Complex::new(R::zero(), R::one());
    let mut rest = vs;
    let mut out = Vec::new();
    while !rest.is_empty() {
        let mut cands: Vec<Vec<Complex<R>>> = rest.clone();
        for i in 0..rest.len() {
            for j in i + 1..rest.len() {
                cands.push(rest[i].iter().zip(&rest[j]).map(|(&a, &b)| a + b).collect());
                cands.push(rest[i].iter().zip(&rest[j]).map(|(&a, &b)| a + imag * b).collect());
            }
        }
        let (best, val) = cands
            .into_iter()
            .map(|mut w| {
                normalize(&mut w);
                let q = bilinear(c, &w, &w).norm();
                (w, q)
            })
            .fold((Vec::new(), R::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= thr {
            return None;
        }
        let cw = c.mul_vec(&best);
        let row: Vec<Complex<R>> = rest.iter().map(|v| crate::linalg::dot(v, &cw)).collect();
        let lin = Matrix::from_rows(&[row], rest.len());
        let ns = lin.nullspace(thr.max(lin.max_abs() * R::epsilon() * R::lit(16.0)));
        let mut next = Vec::with_capacity(ns.len());
        for coef in ns {
            let mut v = vec![Complex::zero(); best.len()];
            for (k, r) in rest.iter().enumerate() {
                crate::linalg::axpy(coef[k], r, &mut v);
            }
            normalize(&mut v);
            next.push(v);
        }
        out.push(best);
        rest = next;
    }
    Some(out)
}

/// Outcome of one attempt at simultaneous congruence diagonalization.
enum Attempt<R> {
    Found(Vec<Vec<Complex<R>>>),
    /// No invertible combination was drawn.
    Degenerate,
    /// The pencil structure rules out diagonalization.
    Obstructed,
}

fn pencil_attempt<R: Real>(forms: &[Matrix<R>], rng: &mut impl Rng, tol: &Tolerance<R>) -> Attempt<R> {
    let m = forms[0].rows();
    let mut c = Matrix::zeros(m, m);
    for f in forms {
        c = c.add(&f.scale(complex_gaussian(rng)));
    }
    let spec = tol.spectral();
    if c.rank_rel(spec.eps()) < m {
        return Attempt::Degenerate;
    }
    let Ok(cinv) = c.inverse(R::epsilon()) else {
        return Attempt::Degenerate;
    };
    let mut pencil = Matrix::zeros(m, m);
    for f in forms {
        pencil = pencil.add(&cinv.matmul(f).scale(complex_gaussian(rng)));
    }
    let Ok(ev) = eigenvalues(&pencil) else {
        return Attempt::Obstructed;
    };
    let escale = max_abs(&ev).max(R::one());
    let mut clusters: Vec<(Complex<R>, usize)> = Vec::new();
    for z in ev {
        match clusters.iter_mut().find(|(c, k)| (*c / R::from_usize(*k).unwrap() - z).norm() <= spec.eps() * escale) {
            Some(cl) => {
                cl.0 = cl.0 + z;
                cl.1 += 1;
            }
            None => clusters.push((z, 1)),
        }
    }
    let pscale = pencil.max_abs().max(R::one());
    let mut basis = Vec::with_capacity(m);
    for (sum, k) in clusters {
        let lambda = sum / R::from_usize(k).unwrap();
        let shifted = pencil.sub(&Matrix::identity(m).scale(lambda));
        let space = shifted.nullspace(spec.eps() * pscale);
        if space.len() != k {
            return Attempt::Obstructed;
        }
        match c_orthogonal_basis(&c, space, spec.eps() * c.max_abs()) {
            Some(vs) => basis.extend(vs),
            None => return Attempt::Obstructed,
        }
    }
    Attempt::Found(basis)
}

/// Simultaneous congruence diagonalization of a family of symmetric
/// forms, as coordinate vectors. `Ok(None)` means proved impossible.
fn diagonalize_family<R: Real>(
    fam: &BilinearFamily<R>,
    cfg: &SearchConfig,
    tol: &Tolerance<R>,
) -> std::result::Result<Vec<Vec<Complex<R>>>, SearchError> {
    let m = fam.m;
    if m == 0 {
        return Ok(Vec::new());
    }
    let scale = fam.scale();
    let thr = tol.threshold(scale);
    // common radical
    let mut stacked_rows = Vec::with_capacity(fam.forms.len() * m);
    for f in &fam.forms {
        stacked_rows.extend(f.row_vecs());
    }
    let radical: Vec<Vec<Complex<R>>> = if stacked_rows.is_empty() {
        Matrix::<R>::identity(m).row_vecs()
    } else {
        Matrix::from_rows(&stacked_rows, m).nullspace(thr)
    };
    let rad_space = Subspace::span(m, &radical.iter().map(|v| Element::new(v.clone())).collect::<Vec<_>>(), tol);
    let keep = rad_space.complement_indices();
    let mut radical = rad_space.basis().into_iter().map(Element::into_coords).collect::<Vec<_>>();
    if keep.is_empty() {
        return Ok(radical);
    }
    let restricted: Vec<Matrix<R>> = fam.forms.iter().map(|f| f.select(&keep, &keep)).collect();
    let embed = |v: &[Complex<R>]| {
        let mut out = vec![Complex::zero(); m];
        for (&k, &z) in keep.iter().zip(v) {
            out[k] = z;
        }
        out
    };
    if keep.len() == 1 {
        let mut out = vec![embed(&[Complex::one()])];
        out.append(&mut radical);
        return Ok(out);
    }
    let mut rng = rng_for(cfg.seed, 0x6e61_7475);
    let mut obstructed = 0;
    for _ in 0..cfg.trials.max(1) {
        match pencil_attempt(&restricted, &mut rng, tol) {
            Attempt::Found(vs) => {
                let mut out: Vec<Vec<Complex<R>>> = vs.iter().map(|v| embed(v)).collect();
                out.extend(radical.iter().cloned());
                let vscale = out.iter().map(|v| max_abs(v)).fold(R::zero(), R::max);
                let independent = Matrix::from_rows(&out, m).rank_rel(tol.eps()) == m;
                if independent && fam.off_diagonal_defect(&out) <= tol.threshold(scale * vscale * vscale) {
                    return Ok(out);
                }
                obstructed += 1;
            }
            Attempt::Obstructed => obstructed += 1,
            Attempt::Degenerate => {}
        }
        if obstructed >= 4 {
            break;
        }
    }
    // Either every draw was singular (no invertible combination exists on
    // a radical-free family, which rules out a diagonal form) or the
    // pencil repeatedly failed the commuting/diagonalizable test.
    Err(SearchError::ProvedNone)
}

/// Finds `count` independent, pairwise-null vectors (in subspace
/// coordinates) for the family.
pub fn find_diagonal_family<R: Real>(
    fam: &BilinearFamily<R>,
    count: usize,
    cfg: &SearchConfig,
    tol: &Tolerance<R>,
) -> std::result::Result<Vec<Element<R>>, SearchError> {
    let m = fam.m;
    assert!(count <= m, "count exceeds subspace dimension");
    let exact = m <= 3;
    match diagonalize_family(fam, cfg, tol) {
        Ok(vs) if count == m => return Ok(vs.into_iter().map(Element::new).collect()),
        Ok(vs) => {
            // any subset of a diagonal basis is pairwise null
            return Ok(vs.into_iter().take(count).map(Element::new).collect());
        }
        Err(_) if count == m => {
            return Err(if exact { SearchError::ProvedNone } else { SearchError::Inconclusive });
        }
        Err(_) => {}
    }
    // Partial families: radical vectors are null against everything, and a
    // single extra vector has no pairing constraint.
    let scale = fam.scale();
    let mut stacked_rows = Vec::new();
    for f in &fam.forms {
        stacked_rows.extend(f.row_vecs());
    }
    let radical = Matrix::from_rows(&stacked_rows, m).nullspace(tol.threshold(scale));
    let rad_space = Subspace::span(m, &radical.into_iter().map(Element::new).collect::<Vec<_>>(), tol);
    if count <= rad_space.rank() + 1 {
        let mut out = rad_space.basis();
        if let Some(&c) = rad_space.complement_indices().first() {
            out.push(Element::basis(m, c));
        }
        out.truncate(count);
        return Ok(out);
    }
    // Two vectors: a random u together with any v outside span(u) that is
    // null against it.
    if count == 2 {
        let mut rng = rng_for(cfg.seed, 0x7061_6972);
        for _ in 0..cfg.trials.max(1) {
            let u: Vec<Complex<R>> = (0..m).map(|_| complex_gaussian(&mut rng)).collect();
            let rows: Vec<Vec<Complex<R>>> = fam.forms.iter().map(|f| f.vec_mul(&u)).collect();
            let lin = Matrix::from_rows(&rows, m);
            for v in lin.nullspace(tol.threshold(lin.max_abs())) {
                let pair = vec![u.clone(), v.clone()];
                if Matrix::from_rows(&pair, m).rank_rel(tol.eps()) == 2 {
                    return Ok(pair.into_iter().map(Element::new).collect());
                }
            }
        }
    }
    Err(SearchError::Inconclusive)
}

fn pairwise_null<R: Real>(alg: &EvolutionAlgebra<R>, vs: &[Element<R>], tol: &Tolerance<R>) -> bool {
    let vscale = vs.iter().map(|v| v.max_abs()).fold(R::zero(), R::max);
    let thr = tol.threshold(alg.scale() * vscale * vscale);
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            if alg.multiply_coords(vs[i].coords(), vs[j].coords()).max_abs() > thr {
                return false;
            }
        }
    }
    true
}

/// Natural basis of the subspace `s` (pairwise-null basis).
pub fn find_natural_basis<R: Real>(
    alg: &EvolutionAlgebra<R>,
    s: &Subspace<R>,
    cfg: &SearchConfig,
    tol: &Tolerance<R>,
) -> std::result::Result<Vec<Element<R>>, SearchError> {
    let u = s.basis();
    if pairwise_null(alg, &u, tol) {
        return Ok(u);
    }
    let fam = restrict_to_vectors(alg, &u);
    let coeffs = find_diagonal_family(&fam, u.len(), cfg, tol)?;
    let lifted: Vec<Element<R>> = coeffs
        .iter()
        .map(|c| {
            let mut x = Element::zero(alg.dim());
            for (p, &z) in c.coords().iter().enumerate() {
                x = x.add(&u[p].scale(z));
            }
            x
        })
        .collect();
    if pairwise_null(alg, &lifted, tol) && Subspace::span(alg.dim(), &lifted, tol).same_as(s, tol) {
        Ok(lifted)
    } else {
        Err(SearchError::Inconclusive)
    }
}

/// One class of proportional nonzero rows: `e_i^2 = coeff_i * direction`.
#[derive(Debug, Clone)]
pub struct RowGroup<R> {
    pub indices: Vec<usize>,
    pub coeffs: Vec<Complex<R>>,
    pub direction: Vec<Complex<R>>,
}

impl<R: Real> RowGroup<R> {
    /// The form `sum_i coeff_i u_i v_i` on the group coordinates.
    fn form(&self) -> Matrix<R> {
        Matrix::diagonal(&self.coeffs)
    }

    fn project(&self, v: &[Complex<R>]) -> Vec<Complex<R>> {
        self.indices.iter().map(|&i| v[i]).collect()
    }
}

/// Partition of the natural basis of an algebra by the direction of
/// `e_i^2`. Every natural basis of the algebra consists of vectors of the
/// annihilator (zero rows) and vectors whose non-annihilator part lies in a
/// single group and is non-isotropic for that group's form.
#[derive(Debug, Clone)]
pub struct RowGroups<R> {
    pub groups: Vec<RowGroup<R>>,
    pub radical: Vec<usize>,
}

impl<R: Real> RowGroups<R> {
    pub fn of(alg: &EvolutionAlgebra<R>, tol: &Tolerance<R>) -> Self {
        let scale = alg.scale();
        let a = alg.structure();
        let nonzero = alg.nonzero_rows(tol);
        let radical = (0..alg.dim()).filter(|i| !nonzero.contains(i)).collect();
        let mut groups: Vec<RowGroup<R>> = Vec::new();
        for &i in &nonzero {
            let row = a.row(i);
            let found = groups.iter_mut().find_map(|g| {
                let dir = &g.direction;
                let p = (0..dir.len()).max_by(|&x, &y| dir[x].norm().partial_cmp(&dir[y].norm()).unwrap())?;
                let c = row[p] / dir[p];
                let ok = row.iter().zip(dir).all(|(&r, &d)| tol.is_zero(r - c * d, scale));
                ok.then_some((g, c))
            });
            match found {
                Some((g, c)) => {
                    g.indices.push(i);
                    g.coeffs.push(c);
                }
                None => groups.push(RowGroup { indices: vec![i], coeffs: vec![Complex::one()], direction: row.to_vec() }),
            }
        }
        Self { groups, radical }
    }

    /// Group containing every non-annihilator coordinate of `v`:
    /// `Ok(None)` for annihilator vectors, `Err` when `v` spans two groups.
    fn group_of(&self, v: &[Complex<R>], thr: R) -> std::result::Result<Option<usize>, ()> {
        let mut hit = None;
        for (gi, g) in self.groups.iter().enumerate() {
            if g.indices.iter().any(|&i| v[i].norm() > thr) {
                if hit.is_some() {
                    return Err(());
                }
                hit = Some(gi);
            }
        }
        Ok(hit)
    }
}

fn lift<R: Real>(n: usize, idx: &[usize], v: &[Complex<R>]) -> Element<R> {
    let mut out = Element::zero(n).into_coords();
    for (&i, &z) in idx.iter().zip(v) {
        out[i] = z;
    }
    Element::new(out)
}

/// C-orthogonal complement of `used` inside the group space, as an
/// orthogonal non-isotropic basis lifted to the ambient space.
fn group_complement<R: Real>(
    n: usize,
    g: &RowGroup<R>,
    used: &[Vec<Complex<R>>],
    tol: &Tolerance<R>,
) -> Option<Vec<Element<R>>> {
    let d = g.indices.len();
    let form = g.form();
    let space: Vec<Vec<Complex<R>>> = if used.is_empty() {
        Matrix::<R>::identity(d).row_vecs()
    } else {
        let rows: Vec<Vec<Complex<R>>> = used.iter().map(|p| form.mul_vec(p)).collect();
        let lin = Matrix::from_rows(&rows, d);
        lin.nullspace(tol.threshold(lin.max_abs()))
    };
    if space.len() + used.len() != d {
        return None;
    }
    let thr = tol.threshold(form.max_abs());
    let orth = c_orthogonal_basis(&form, space, thr)?;
    Some(orth.iter().map(|v| lift(n, &g.indices, v)).collect())
}

fn annihilator_complement<R: Real>(n: usize, radical: &[usize], used: &[Element<R>], tol: &Tolerance<R>) -> Vec<Element<R>> {
    let mut span = Subspace::span(n, used, tol);
    let mut out = Vec::new();
    for &r in radical {
        let e = Element::basis(n, r);
        if !span.contains(&e, tol) {
            span = span.sum(&Subspace::span(n, std::slice::from_ref(&e), tol), tol);
            out.push(e);
        }
    }
    out
}

fn verify_extension<R: Real>(
    alg: &EvolutionAlgebra<R>,
    f: &[Element<R>],
    z: &[Element<R>],
    tol: &Tolerance<R>,
) -> bool {
    let mut all = f.to_vec();
    all.extend(z.iter().cloned());
    all.len() == alg.dim()
        && pairwise_null(alg, &all, tol)
        && Subspace::span(alg.dim(), &all, tol).rank() == alg.dim()
}

/// Completes the natural basis `f` of `s` to a natural basis of the whole
/// algebra, or proves that `f` does not extend.
pub fn extend_to_natural_basis<R: Real>(
    alg: &EvolutionAlgebra<R>,
    s: &Subspace<R>,
    f: &[Element<R>],
    tol: &Tolerance<R>,
) -> std::result::Result<Vec<Element<R>>, SearchError> {
    let n = alg.dim();
    debug_assert!(f.iter().all(|v| s.contains(v, tol)));
    let groups = RowGroups::of(alg, tol);
    let mut per_group: Vec<Vec<Vec<Complex<R>>>> = vec![Vec::new(); groups.groups.len()];
    let mut annihilator_part = Vec::new();
    for v in f {
        let thr = tol.threshold(v.max_abs());
        match groups.group_of(v.coords(), thr) {
            Err(()) => return Err(SearchError::ProvedNone),
            Ok(None) => annihilator_part.push(v.clone()),
            Ok(Some(gi)) => {
                let g = &groups.groups[gi];
                let p = g.project(v.coords());
                let q = bilinear(&g.form(), &p, &p);
                let pscale = max_abs(&p);
                if tol.is_zero(q, max_abs(&g.coeffs) * pscale * pscale) {
                    return Err(SearchError::ProvedNone);
                }
                per_group[gi].push(p);
            }
        }
    }
    let mut ext = Vec::new();
    for (g, used) in groups.groups.iter().zip(&per_group) {
        match group_complement(n, g, used, tol) {
            Some(vs) => ext.extend(vs),
            None => return Err(SearchError::ProvedNone),
        }
    }
    ext.extend(annihilator_complement(n, &groups.radical, &annihilator_part, tol));
    if verify_extension(alg, f, &ext, tol) {
        Ok(ext)
    } else {
        Err(SearchError::ProvedNone)
    }
}

/// Searches over all natural bases of `s` for one that extends to the
/// whole algebra. Returns the basis of `s` and its completion, or `None`
/// when no natural basis of `s` extends.
pub fn find_extendable_basis<R: Real>(
    alg: &EvolutionAlgebra<R>,
    s: &Subspace<R>,
    tol: &Tolerance<R>,
) -> Option<BasisWithExtension<R>> {
    let n = alg.dim();
    let u = s.basis();
    let m = u.len();
    if m == 0 {
        return Some((Vec::new(), (0..n).map(|i| Element::basis(n, i)).collect()));
    }
    let umat = Matrix::from_rows(&u.iter().map(|v| v.coords().to_vec()).collect::<Vec<_>>(), n);
    let groups = RowGroups::of(alg, tol);
    let nonrad: Vec<usize> = (0..n).filter(|i| !groups.radical.contains(i)).collect();
    let all_rows: Vec<usize> = (0..m).collect();
    let thr = tol.threshold(umat.max_abs());
    // vectors of s vanishing on the coordinates in `cols`
    let vanishing_on = |cols: &[usize]| -> Vec<Element<R>> {
        if cols.is_empty() {
            return u.clone();
        }
        let sub = umat.select(&all_rows, cols).transpose();
        sub.nullspace(thr).iter().map(|y| Element::new(umat.vec_mul(y))).collect()
    };
    let s_rad = Subspace::span(n, &vanishing_on(&nonrad), tol);
    let mut basis_s: Vec<Element<R>> = Vec::new();
    let mut ext: Vec<Element<R>> = Vec::new();
    let mut dim_total = s_rad.rank();
    for g in &groups.groups {
        let outside: Vec<usize> = nonrad.iter().copied().filter(|i| !g.indices.contains(i)).collect();
        let s_g = vanishing_on(&outside);
        // pick lifts whose projections are independent
        let mut proj_span = Subspace::zero(g.indices.len());
        let mut pairs: Vec<Vec<Complex<R>>> = Vec::new();
        let mut projs: Vec<Vec<Complex<R>>> = Vec::new();
        for v in &s_g {
            let p = g.project(v.coords());
            let pe = Element::new(p.clone());
            if pe.max_abs() <= thr || proj_span.contains(&pe, tol) {
                continue;
            }
            proj_span = proj_span.sum(&Subspace::span(g.indices.len(), &[pe], tol), tol);
            let mut joint = p.clone();
            joint.extend_from_slice(v.coords());
            pairs.push(joint);
            projs.push(p);
        }
        dim_total += pairs.len();
        if !pairs.is_empty() {
            let d = g.indices.len();
            let form = g.form();
            let joint_form = Matrix::from_fn(d + n, d + n, |i, j| if i < d && j < d { form[(i, j)] } else { Complex::zero() });
            let orth = c_orthogonal_basis(&joint_form, pairs, tol.threshold(form.max_abs()))?;
            let mut used = Vec::with_capacity(orth.len());
            for w in orth {
                used.push(w[..d].to_vec());
                basis_s.push(Element::new(w[d..].to_vec()));
            }
            ext.extend(group_complement(n, g, &used, tol)?);
        } else {
            ext.extend(group_complement(n, g, &[], tol)?);
        }
    }
    if dim_total != m {
        return None;
    }
    let rad_basis = s_rad.basis();
    ext.extend(annihilator_complement(n, &groups.radical, &rad_basis, tol));
    basis_s.extend(rad_basis);
    let spans = Subspace::span(n, &basis_s, tol).same_as(s, tol);
    (spans && verify_extension(alg, &basis_s, &ext, tol)).then_some((basis_s, ext))
}

/// A natural basis of a subspace and its completion to the whole algebra.
pub type BasisWithExtension<R> = (Vec<Element<R>>, Vec<Element<R>>);

/// Classifies `s` against the three subalgebra conceptions.
pub fn classify_subspace<R: Real>(
    alg: &EvolutionAlgebra<R>,
    s: &Subspace<R>,
    cfg: &SearchConfig,
    tol: &Tolerance<R>,
) -> SubspaceClass<R> {
    if !alg.is_subalgebra(s, tol) {
        return SubspaceClass {
            kind: SubspaceKind::NotSubalgebra,
            certainty: Certainty::Proved,
            natural_basis: None,
            extension: None,
        };
    }
    if let Some((basis, ext)) = find_extendable_basis(alg, s, tol) {
        return SubspaceClass {
            kind: SubspaceKind::ExtendableEvolutionSubalgebra,
            certainty: Certainty::Proved,
            natural_basis: Some(basis),
            extension: Some(ext),
        };
    }
    match find_natural_basis(alg, s, cfg, tol) {
        Ok(basis) => SubspaceClass {
            kind: SubspaceKind::EvolutionSubalgebraNotExtendable,
            certainty: Certainty::Proved,
            natural_basis: Some(basis),
            extension: None,
        },
        Err(e) => SubspaceClass {
            kind: SubspaceKind::SubalgebraNoNaturalBasis,
            certainty: if e == SearchError::ProvedNone { Certainty::Proved } else { Certainty::HeuristicOnly },
            natural_basis: None,
            extension: None,
        },
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

    fn no_basis() -> A {
        A::from_real_rows(&[&[1., 1., 0.], &[-1., -1., 0.], &[0., 1., 1.]]).unwrap()
    }

    fn not_extendable() -> A {
        A::from_real_rows(&[&[1., 1., 1.], &[-1., -1., 1.], &[0., 0., 0.]]).unwrap()
    }

    fn two_chains() -> A {
        A::from_real_rows(&[&[0., 1., 0., 0.], &[0.; 4], &[0., 0., 0., 1.], &[0.; 4]]).unwrap()
    }

    fn span(n: usize, vs: &[&[f64]]) -> Subspace<f64> {
        Subspace::span(n, &vs.iter().map(|v| E::from_real(v)).collect::<Vec<_>>(), &tol())
    }

    #[test]
    fn restrict_full_space_is_diagonal() {
        let a = no_basis();
        let fam = restrict_product(&a, &Subspace::full(3)).unwrap();
        for (k, f) in fam.forms().iter().enumerate() {
            for i in 0..3 {
                for j in 0..3 {
                    let want = if i == j { a.entry(i, k) } else { cplx(0., 0.) };
                    assert_eq!(f[(i, j)], want);
                }
            }
        }
        assert_eq!(restrict_product(&a, &Subspace::zero(3)).unwrap().subspace_dim(), 0);
    }

    #[test]
    fn restrict_product_by_hand() {
        // u1 = e1+e2, u2 = e2+e3 (already echelon-reduced to e1 - e3, e2 + e3)
        let s = span(3, &[&[1., 1., 0.], &[0., 1., 1.]]);
        let fam = restrict_product(&no_basis(), &s).unwrap();
        let u = s.basis();
        for (k, f) in fam.forms().iter().enumerate() {
            for p in 0..2 {
                for q in 0..2 {
                    // hand expansion: (u_p * u_q)_k = sum_i u_p,i u_q,i a_{i,k}
                    let want: Complex<f64> =
                        (0..3).map(|i| u[p].coords()[i] * u[q].coords()[i] * no_basis().entry(i, k)).sum();
                    assert!((f[(p, q)] - want).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn subalgebra_without_natural_basis() {
        let s = span(3, &[&[1., 1., 0.], &[0., 1., 1.]]);
        let fam = restrict_product(&no_basis(), &s).unwrap();
        assert_eq!(find_diagonal_family(&fam, 2, &SearchConfig::default(), &tol()), Err(SearchError::ProvedNone));
        assert_eq!(find_natural_basis(&no_basis(), &s, &SearchConfig::default(), &tol()), Err(SearchError::ProvedNone));
    }

    #[test]
    fn coordinate_subspace_is_its_own_natural_basis() {
        let s = Subspace::coordinate(3, &[0, 2]);
        let b = find_natural_basis(&no_basis(), &s, &SearchConfig::default(), &tol()).unwrap();
        assert_eq!(b, vec![E::basis(3, 0), E::basis(3, 2)]);
    }

    #[test]
    fn scrambled_diagonal_family_is_recovered() {
        // diagonal family D_k, scrambled by a fixed invertible P: B_k = P^T D_k P
        let d: Vec<Matrix<f64>> = (0..3)
            .map(|k| Matrix::diagonal(&[cplx(1. + k as f64, 0.), cplx(-2., k as f64), cplx(0.5, 1.0 - k as f64)]))
            .collect();
        let p = Matrix::from_fn(3, 3, |i, j| cplx(if i == j { 2.0 } else { 0.3 * (i + 2 * j) as f64 }, 0.1 * i as f64));
        let forms: Vec<Matrix<f64>> = d.iter().map(|dk| p.transpose().matmul(dk).matmul(&p)).collect();
        let fam = BilinearFamily::new(3, forms);
        let found = find_diagonal_family(&fam, 3, &SearchConfig::default(), &tol()).unwrap();
        let coords: Vec<Vec<Complex<f64>>> = found.iter().map(|e| e.coords().to_vec()).collect();
        assert!(fam.off_diagonal_defect(&coords) < 1e-9);
        assert_eq!(Matrix::from_rows(&coords, 3).rank_rel(1e-9), 3);
    }

    #[test]
    fn basis_found_but_not_extendable() {
        let s = span(3, &[&[1., 1., 0.], &[0., 0., 1.]]);
        let b = find_natural_basis(&not_extendable(), &s, &SearchConfig::default(), &tol()).unwrap();
        assert_eq!(b.len(), 2);
        let f = vec![E::from_real(&[1., 1., 0.]), E::basis(3, 2)];
        assert_eq!(extend_to_natural_basis(&not_extendable(), &s, &f, &tol()), Err(SearchError::ProvedNone));
        let class = classify_subspace(&not_extendable(), &s, &SearchConfig::default(), &tol());
        assert_eq!(class.kind, SubspaceKind::EvolutionSubalgebraNotExtendable);
        assert_eq!(class.certainty, Certainty::Proved);
    }

    #[test]
    fn no_basis_classification() {
        let s = span(3, &[&[1., 1., 0.], &[0., 1., 1.]]);
        let class = classify_subspace(&no_basis(), &s, &SearchConfig::default(), &tol());
        assert_eq!(class.kind, SubspaceKind::SubalgebraNoNaturalBasis);
        assert_eq!(class.certainty, Certainty::Proved);
    }

    #[test]
    fn two_chains_diagonal_subspace() {
        let s = span(4, &[&[1., 0., 1., 0.], &[0., 1., 0., 1.]]);
        let b = find_natural_basis(&two_chains(), &s, &SearchConfig::default(), &tol()).unwrap();
        assert_eq!(b.len(), 2);
        let f = vec![E::from_real(&[1., 0., 1., 0.]), E::from_real(&[0., 1., 0., 1.])];
        assert_eq!(two_chains().multiply(&f[0], &f[1]).unwrap(), E::zero(4));
        assert_eq!(extend_to_natural_basis(&two_chains(), &s, &f, &tol()), Err(SearchError::ProvedNone));
        let class = classify_subspace(&two_chains(), &s, &SearchConfig::default(), &tol());
        assert_eq!(class.kind, SubspaceKind::EvolutionSubalgebraNotExtendable);
    }

    #[test]
    fn en3_extension_by_standard_vectors() {
        let en3 = A::from_real_rows(&[&[0., 1., 0.], &[0., 0., 1.], &[0., 0., 0.]]).unwrap();
        let s = Subspace::coordinate(3, &[0]);
        let ext = extend_to_natural_basis(&en3, &s, &[E::basis(3, 0)], &tol()).unwrap();
        assert_eq!(ext, vec![E::basis(3, 1), E::basis(3, 2)]);
    }

    #[test]
    fn coordinate_subalgebras_are_extendable() {
        let en3 = A::from_real_rows(&[&[0., 1., 0.], &[0., 0., 1.], &[0., 0., 0.]]).unwrap();
        for idx in [vec![2], vec![1, 2], vec![0, 1, 2]] {
            let class = classify_subspace(&en3, &Subspace::coordinate(3, &idx), &SearchConfig::default(), &tol());
            assert_eq!(class.kind, SubspaceKind::ExtendableEvolutionSubalgebra);
            assert_eq!(class.certainty, Certainty::Proved);
        }
        let class = classify_subspace(&en3, &Subspace::coordinate(3, &[0]), &SearchConfig::default(), &tol());
        assert_eq!(class.kind, SubspaceKind::NotSubalgebra);
    }

    #[test]
    fn isotropic_vector_in_proportional_group_does_not_extend() {
        // e1^2 = e3, e2^2 = -e3: x = e1 + e2 squares to zero
        let a = A::from_real_rows(&[&[0., 0., 1.], &[0., 0., -1.], &[0., 0., 0.]]).unwrap();
        let s = span(3, &[&[1., 1., 0.]]);
        let class = classify_subspace(&a, &s, &SearchConfig::default(), &tol());
        assert_eq!(class.kind, SubspaceKind::EvolutionSubalgebraNotExtendable);
        // whereas e1 + 2 e2 squares to -3 e3 and spans a non-subalgebra
        let s2 = span(3, &[&[1., 2., 0.]]);
        assert_eq!(classify_subspace(&a, &s2, &SearchConfig::default(), &tol()).kind, SubspaceKind::NotSubalgebra);
    }

    #[test]
    fn extension_inside_a_proportional_group() {
        // E2: e1^2 = e1, e2^2 = e1; x = e1 + 2e2 is non-isotropic (1 + 4 = 5)
        let e2 = A::from_real_rows(&[&[1., 0.], &[1., 0.]]).unwrap();
        let s = span(2, &[&[1., 2.]]);
        let f = vec![E::from_real(&[1., 2.])];
        let ext = extend_to_natural_basis(&e2, &s, &f, &tol()).unwrap();
        assert_eq!(ext.len(), 1);
        assert!(e2.multiply(&f[0], &ext[0]).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn partial_family_counts() {
        let s = span(3, &[&[1., 1., 0.], &[0., 1., 1.]]);
        let fam = restrict_product(&no_basis(), &s).unwrap();
        assert_eq!(find_diagonal_family(&fam, 1, &SearchConfig::default(), &tol()).unwrap().len(), 1);
        assert!(find_diagonal_family(&fam, 0, &SearchConfig::default(), &tol()).unwrap().is_empty());
    }
}
