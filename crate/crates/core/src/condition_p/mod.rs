//! Condition P: every subalgebra has a natural basis extending to a
//! natural basis of the whole algebra.
//!
//! Exact decisions exist in dimension at most two, for nilpotent algebras,
//! for permutation-type structure matrices and for algebras that split off
//! an abelian summand onto one of those. Everything else goes through a
//! counterexample search that can only ever report `Fails` or `Unknown`.

mod dim2;
mod nilpotent;

pub use dim2::{classify_dim2, decide_p_dim2, e5, e6, Dim2Class};
pub use nilpotent::decide_p_nilpotent;
#[doc(hidden)]
pub use nilpotent::radical_elimination;

use num_complex::Complex;
use num_traits::Zero;

use crate::algebra::{BasisChange, Element, EvolutionAlgebra, Subspace};
use crate::homotopy::{QuadraticSystem, TrackConfig};
use crate::linalg::{max_abs, Matrix};
use crate::natural_basis::{classify_subspace, Certainty, SearchConfig, SubspaceClass};
use crate::nilpotency::is_nilpotent;
use crate::permutation::{decompose, BlockKind, PermutationSpec};
use crate::scalar::{Real, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Verdict {
    Satisfies,
    Fails,
    Unknown,
}

/// Which decision procedure produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Route {
    Trivial,
    Dim2,
    Nilpotent,
    Permutation,
    AbelianSplit,
    Heuristic,
}

impl Route {
    pub fn is_exact(self) -> bool {
        self != Self::Heuristic
    }
}

/// A subalgebra violating condition P, with its classification.
#[derive(Debug, Clone, PartialEq)]
pub struct PWitness<R> {
    pub subspace: Subspace<R>,
    pub class: SubspaceClass<R>,
}

/// `ZN^k + C^{n-k}` normal form of a nilpotent algebra with condition P.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm<R> {
    pub k: usize,
    pub matrix: EvolutionAlgebra<R>,
    pub change: BasisChange<R>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PDecision<R> {
    pub verdict: Verdict,
    pub route: Route,
    pub witness: Option<PWitness<R>>,
    pub canonical: Option<CanonicalForm<R>>,
    pub dim2: Option<Dim2Class<R>>,
}

impl<R: Real> PDecision<R> {
    fn new(route: Route) -> Self {
        Self { verdict: Verdict::Unknown, route, witness: None, canonical: None, dim2: None }
    }

    fn satisfies(route: Route) -> Self {
        Self { verdict: Verdict::Satisfies, ..Self::new(route) }
    }

    fn fails(route: Route, witness: PWitness<R>) -> Self {
        Self { verdict: Verdict::Fails, witness: Some(witness), ..Self::new(route) }
    }
}

/// Search budgets for the randomized parts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PBudget {
    pub search: SearchConfig,
    pub track: TrackConfig,
}

impl PBudget {
    pub fn seeded(seed: u64) -> Self {
        Self {
            search: SearchConfig { seed, ..SearchConfig::default() },
            track: TrackConfig { seed, newton_starts: 16, ..TrackConfig::default() },
        }
    }
}

/// Classifies `span(gens)` and keeps it when it is a proved
/// non-extendable subalgebra.
pub fn candidate_witness<R: Real>(
    alg: &EvolutionAlgebra<R>,
    gens: &[Element<R>],
    budget: &PBudget,
    tol: &Tolerance<R>,
) -> Option<PWitness<R>> {
    let subspace = Subspace::span(alg.dim(), gens, tol);
    if subspace.rank() == 0 {
        return None;
    }
    let class = classify_subspace(alg, &subspace, &budget.search, tol);
    (class.kind.is_non_extendable_subalgebra() && class.certainty == Certainty::Proved)
        .then_some(PWitness { subspace, class })
}

/// Nonzero `x` with `x * x = 0`.
///
/// Tries a dependence `sum alpha_i e_i^2 = 0` among the nonzero rows first
/// (giving `x = sum sqrt(alpha_i) e_i`), then a basis vector with zero
/// square. `None` is a proof: with independent rows and no zero row,
/// `x * x = sum x_i^2 e_i^2` vanishes only at `x = 0`.
pub fn find_null_square<R: Real>(alg: &EvolutionAlgebra<R>, tol: &Tolerance<R>) -> Option<Element<R>> {
    let n = alg.dim();
    let nz = alg.nonzero_rows(tol);
    if !nz.is_empty() {
        let rows: Vec<Vec<Complex<R>>> = nz.iter().map(|&i| alg.structure().row(i).to_vec()).collect();
        let m = Matrix::from_rows(&rows, n).transpose();
        if let Some(mut alpha) = m.nullspace(tol.threshold(m.max_abs())).into_iter().next() {
            // drop roundoff so the support is the true dependence
            let weight: Vec<R> = rows.iter().zip(&alpha).map(|(r, a)| a.norm() * max_abs(r)).collect();
            let top = weight.iter().copied().fold(R::zero(), R::max);
            for (a, w) in alpha.iter_mut().zip(&weight) {
                if *w <= tol.spectral().eps() * top {
                    *a = Complex::zero();
                }
            }
            let lead = alpha.iter().copied().find(|z| z.norm() > R::zero()).unwrap_or(Complex::zero());
            let mut x = Element::zero(n).into_coords();
            for (&i, &a) in nz.iter().zip(&alpha) {
                x[i] = (a / lead).sqrt();
            }
            let x = Element::new(x);
            let xs = x.max_abs();
            if alg.multiply_coords(x.coords(), x.coords()).max_abs() <= tol.threshold(alg.scale() * xs * xs) {
                return Some(x);
            }
        }
    }
    (0..n).find(|i| !nz.contains(i)).map(|i| Element::basis(n, i))
}

/// Nonzero idempotents (`x * x = x`). Closed form in dimension at most two,
/// path tracking plus Newton restarts above.
pub fn find_idempotents<R: Real>(alg: &EvolutionAlgebra<R>, cfg: &TrackConfig, tol: &Tolerance<R>) -> Vec<Element<R>> {
    match alg.dim() {
        1 => {
            let a = alg.entry(0, 0);
            if tol.is_zero(a, R::one()) {
                Vec::new()
            } else {
                vec![Element::new(vec![Complex::new(R::one(), R::zero()) / a])]
            }
        }
        2 => dim2::idempotents_dim2(alg, tol),
        n => {
            let sys = QuadraticSystem::new(alg.structure().transpose(), Matrix::identity(n));
            sys.solve(cfg)
                .roots
                .into_iter()
                .map(Element::new)
                .filter(|x| x.max_abs() > R::lit(cfg.dedup_tol))
                .collect()
        }
    }
}

/// Witness subspace in the coordinates of `change`, mapped back.
fn mapped_witness<R: Real>(
    alg: &EvolutionAlgebra<R>,
    change: &BasisChange<R>,
    gens: &[Element<R>],
    budget: &PBudget,
    tol: &Tolerance<R>,
) -> Option<PWitness<R>> {
    let old: Vec<Element<R>> = gens.iter().map(|g| change.to_old(g)).collect();
    candidate_witness(alg, &old, budget, tol)
}

fn decide_permutation<R: Real>(
    alg: &EvolutionAlgebra<R>,
    spec: &PermutationSpec<R>,
    budget: &PBudget,
    tol: &Tolerance<R>,
) -> PDecision<R> {
    let n = alg.dim();
    let rep = decompose(spec, tol);
    let long_chains = rep.chains.iter().filter(|&&k| k >= 2).count();
    let ok = rep.cycles.len() <= 1 && rep.cycles.iter().all(|&p| p == 1) && long_chains <= 1;
    if ok {
        return PDecision::satisfies(Route::Permutation);
    }
    let mut starts = Vec::with_capacity(rep.blocks.len());
    let mut pos = 0;
    for b in &rep.blocks {
        starts.push(pos);
        pos += b.size();
    }
    let e = |i: usize| Element::basis(n, i);
    let mut gens: Vec<Element<R>> = Vec::new();
    if let Some(bi) = rep.blocks.iter().position(|b| b.kind == BlockKind::Cycle && b.size() >= 2) {
        // the sum over a cycle is idempotent
        let s = starts[bi];
        gens.push((s..s + rep.blocks[bi].size()).fold(Element::zero(n), |acc, i| acc.add(&e(i))));
    } else if rep.cycles.len() >= 2 {
        gens.push(e(starts[0]).add(&e(starts[1])));
    } else {
        // two chains of length >= 2, longest first
        let chains: Vec<usize> =
            (0..rep.blocks.len()).filter(|&i| rep.blocks[i].kind == BlockKind::Chain && rep.blocks[i].size() >= 2).collect();
        let (b1, b2) = (chains[0], chains[1]);
        let (k1, k2) = (rep.blocks[b1].size(), rep.blocks[b2].size());
        for i in 0..k2 {
            gens.push(e(starts[b1] + k1 - k2 + i).add(&e(starts[b2] + i)));
        }
    }
    match mapped_witness(alg, &rep.witness, &gens, budget, tol) {
        Some(w) => PDecision::fails(Route::Permutation, w),
        None => PDecision::new(Route::Permutation),
    }
}

/// Splits `E = E' + C^j` with `C^j` inside the annihilator. Returns the
/// change to a basis whose first `dim E'` vectors span `E'`.
pub fn split_abelian<R: Real>(
    alg: &EvolutionAlgebra<R>,
    tol: &Tolerance<R>,
) -> Option<(EvolutionAlgebra<R>, usize, BasisChange<R>)> {
    let n = alg.dim();
    let y = alg.nonzero_rows(tol);
    let z: Vec<usize> = (0..n).filter(|i| !y.contains(i)).collect();
    if z.is_empty() || y.is_empty() {
        return None;
    }
    let a = alg.structure();
    let q = a.select(&y, &y);
    let p = a.select(&y, &z);
    // orthonormal basis of col(Q), then C with Q C = proj P
    let thr = tol.threshold(a.max_abs());
    let mut basis: Vec<Vec<Complex<R>>> = Vec::new();
    for j in 0..q.cols() {
        let mut v = q.column(j);
        for u in &basis {
            let c = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum::<Complex<R>>();
            crate::linalg::axpy(-c, u, &mut v);
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<R>().sqrt();
        if norm > thr {
            basis.push(v.iter().map(|&z| z / norm).collect());
        }
    }
    let mut proj = Matrix::zeros(y.len(), z.len());
    for col in 0..z.len() {
        let pc = p.column(col);
        for u in &basis {
            let c = u.iter().zip(&pc).map(|(a, b)| a.conj() * b).sum::<Complex<R>>();
            for r in 0..y.len() {
                proj[(r, col)] = proj[(r, col)] + c * u[r];
            }
        }
    }
    let c = consistent_solve(&q, &proj, thr)?;
    let resid = p.sub(&q.matmul(&c));
    let rs = Subspace::span(z.len(), &resid.row_vecs().into_iter().map(Element::new).collect::<Vec<_>>(), tol);
    let free = rs.complement_indices();
    if free.is_empty() {
        return None;
    }
    let mut rows: Vec<Vec<Complex<R>>> = Vec::with_capacity(n);
    for (r, &yi) in y.iter().enumerate() {
        let mut v = vec![Complex::zero(); n];
        v[yi] = Complex::new(R::one(), R::zero());
        for (col, &zi) in z.iter().enumerate() {
            v[zi] = c[(r, col)];
        }
        rows.push(v);
    }
    for h in rs.basis() {
        let mut v = vec![Complex::zero(); n];
        for (col, &zi) in z.iter().enumerate() {
            v[zi] = h.coords()[col];
        }
        rows.push(v);
    }
    for &f in &free {
        rows.push(Element::basis(n, z[f]).into_coords());
    }
    let change = BasisChange::for_algebra(alg, Matrix::from_rows(&rows, n), tol).ok()?;
    let b = alg.apply_basis_change(&change, tol).ok()?;
    let m = n - free.len();
    let scale = b.scale();
    for i in 0..n {
        for j in m..n {
            if !tol.is_zero(b.structure()[(i, j)], scale) {
                return None;
            }
        }
    }
    let idx: Vec<usize> = (0..m).collect();
    let inner = EvolutionAlgebra::new(b.structure().select(&idx, &idx)).ok()?;
    Some((inner, free.len(), change))
}

/// Particular solution of a consistent system `Q X = B`.
fn consistent_solve<R: Real>(q: &Matrix<R>, b: &Matrix<R>, thr: R) -> Option<Matrix<R>> {
    let (m, k) = (q.cols(), b.cols());
    let aug = Matrix::from_fn(q.rows(), m + k, |i, j| if j < m { q[(i, j)] } else { b[(i, j - m)] });
    let (ech, pivots) = aug.rref(thr);
    let mut x = Matrix::zeros(m, k);
    for (r, &pc) in pivots.iter().enumerate() {
        if pc >= m {
            return None;
        }
        for j in 0..k {
            x[(pc, j)] = ech[(r, m + j)] / ech[(r, pc)];
        }
    }
    Some(x)
}

/// Decides condition P, exactly where a characterization is available.
pub fn decide_p<R: Real>(alg: &EvolutionAlgebra<R>, budget: &PBudget, tol: &Tolerance<R>) -> PDecision<R> {
    let n = alg.dim();
    if n == 1 {
        return PDecision::satisfies(Route::Trivial);
    }
    if n == 2 {
        return decide_p_dim2(alg, budget, tol).expect("dimension checked");
    }
    if is_nilpotent(alg, tol).0 {
        return decide_p_nilpotent(alg, budget, tol).expect("nilpotency checked");
    }
    if let Some(spec) = PermutationSpec::recognize(alg, tol) {
        return decide_permutation(alg, &spec, budget, tol);
    }
    if let Some((inner, j, change)) = split_abelian(alg, tol) {
        let sub = decide_p(&inner, budget, tol);
        match sub.verdict {
            Verdict::Satisfies => return PDecision::satisfies(Route::AbelianSplit),
            Verdict::Fails => {
                let m = inner.dim();
                let w = sub.witness.as_ref().expect("fails carries a witness");
                let gens: Vec<Element<R>> = w
                    .subspace
                    .basis()
                    .into_iter()
                    .map(|v| {
                        let mut c = v.into_coords();
                        c.resize(m + j, Complex::zero());
                        Element::new(c)
                    })
                    .collect();
                if let Some(w) = mapped_witness(alg, &change, &gens, budget, tol) {
                    return PDecision::fails(Route::AbelianSplit, w);
                }
            }
            Verdict::Unknown => {}
        }
    }
    heuristic(alg, budget, tol)
}

fn heuristic<R: Real>(alg: &EvolutionAlgebra<R>, budget: &PBudget, tol: &Tolerance<R>) -> PDecision<R> {
    let mut candidates: Vec<Element<R>> = find_null_square(alg, tol).into_iter().collect();
    candidates.extend(find_idempotents(alg, &budget.track, tol));
    for x in candidates {
        if let Some(w) = candidate_witness(alg, &[x], budget, tol) {
            return PDecision::fails(Route::Heuristic, w);
        }
    }
    PDecision::new(Route::Heuristic)
}

#[cfg(test)]
mod tests;
