//! Numerical exploration of the fixed-point system `x∘x = M x` and of the
//! level-by-level reduction of non-nilpotent algebras towards the
//! conjectured list `ES_1 + ZN^s + C^{n-s-1}`.

use std::time::Instant;

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;

use crate::algebra::{BasisChange, Element, EvolutionAlgebra};
use crate::condition_p::{candidate_witness, decide_p_nilpotent, PBudget, PDecision, PWitness, Verdict};
use crate::eigen::poly_roots;
use crate::error::{Error, Result};
use crate::homotopy::{QuadraticSystem, TrackConfig};
use crate::linalg::{max_abs, Matrix};
use crate::nilpotency::is_nilpotent;
use crate::random::{complex_gaussian, complex_uniform, rng_for};
use crate::scalar::{Real, Tolerance};

/// `x_i^2 = (M x)_i` for all `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointSystem<R> {
    m: Matrix<R>,
}

impl<R: Real> FixedPointSystem<R> {
    pub fn new(m: Matrix<R>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
        }
        if m.rows() == 0 {
            return Err(Error::EmptyAlgebra);
        }
        if !m.is_finite() {
            return Err(Error::NonFinite { row: 0, col: 0 });
        }
        Ok(Self { m })
    }

    pub fn matrix(&self) -> &Matrix<R> {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn residual(&self, x: &[Complex<R>]) -> R {
        let mx = self.m.mul_vec(x);
        x.iter().zip(&mx).map(|(&a, &b)| (a * a - b).norm()).fold(R::zero(), R::max)
    }

    fn quadratic(&self) -> QuadraticSystem<R> {
        QuadraticSystem::new(Matrix::identity(self.dim()), self.m.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub track: TrackConfig,
    pub support_eps: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self { track: TrackConfig::default(), support_eps: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSet<R> {
    pub roots: Vec<Element<R>>,
    pub path_failures: usize,
    /// Indices into `roots` with every coordinate above the support
    /// threshold.
    pub full_support: Vec<usize>,
}

impl<R: Real> SolutionSet<R> {
    fn collect(roots: Vec<Vec<Complex<R>>>, path_failures: usize, support_eps: f64) -> Self {
        let roots: Vec<Element<R>> = roots.into_iter().map(Element::new).collect();
        let full_support = (0..roots.len())
            .filter(|&i| roots[i].coords().iter().all(|z| z.norm() > R::lit(support_eps)))
            .collect();
        Self { roots, path_failures, full_support }
    }

    pub fn full_support_roots(&self) -> impl Iterator<Item = &Element<R>> {
        self.full_support.iter().map(|&i| &self.roots[i])
    }
}

fn dedup_push<R: Real>(roots: &mut Vec<Vec<Complex<R>>>, x: Vec<Complex<R>>, tol: f64) {
    let fresh = roots.iter().all(|r| {
        let d = r.iter().zip(&x).map(|(&a, &b)| (a - b).norm()).fold(R::zero(), R::max);
        d > R::lit(tol) * (R::one() + max_abs(&x))
    });
    if fresh {
        roots.push(x);
    }
}

/// Closed-form roots for `n <= 2`.
pub fn solve_small<R: Real>(sys: &FixedPointSystem<R>, cfg: &SolveConfig) -> Result<SolutionSet<R>> {
    let m = &sys.m;
    let eps = R::default_eps();
    let tol = Tolerance::new(eps)?;
    let scale = m.max_abs();
    let mut cands: Vec<Vec<Complex<R>>> = Vec::new();
    match sys.dim() {
        1 => {
            cands.push(vec![Complex::zero()]);
            cands.push(vec![m[(0, 0)]]);
        }
        2 => {
            if tol.is_zero(m[(0, 1)], scale) && tol.is_zero(m[(1, 0)], scale) {
                for x1 in [Complex::zero(), m[(0, 0)]] {
                    for x2 in [Complex::zero(), m[(1, 1)]] {
                        cands.push(vec![x1, x2]);
                    }
                }
            } else {
                // relabel so that m12 != 0
                let swap = tol.is_zero(m[(0, 1)], scale);
                let (i, j) = if swap { (1, 0) } else { (0, 1) };
                let (m11, m12, m21, m22) = (m[(i, i)], m[(i, j)], m[(j, i)], m[(j, j)]);
                let cubic = [m12 * (m11 * m22 - m12 * m21), m11 * m11 - m12 * m22, -m11.scale(R::lit(2.0)), Complex::one()];
                let mut xs = vec![Complex::zero()];
                xs.extend(poly_roots(&cubic, eps)?);
                for x1 in xs {
                    let x2 = (x1 * x1 - m11 * x1) / m12;
                    cands.push(if swap { vec![x2, x1] } else { vec![x1, x2] });
                }
            }
        }
        n => return Err(Error::WrongDimension { expected: 2, found: n }),
    }
    let q = sys.quadratic();
    let mut roots = Vec::new();
    for c in cands {
        if let Some(x) = q.polish(&c, &cfg.track) {
            dedup_push(&mut roots, x, cfg.track.dedup_tol);
        }
    }
    Ok(SolutionSet::collect(roots, 0, cfg.support_eps))
}

/// All roots by total-degree homotopy from `x∘x = x`.
pub fn solve_numeric<R: Real>(sys: &FixedPointSystem<R>, cfg: &SolveConfig) -> SolutionSet<R> {
    let out = sys.quadratic().solve(&cfg.track);
    let mut roots = Vec::new();
    for r in out.roots {
        dedup_push(&mut roots, r, cfg.track.dedup_tol);
    }
    SolutionSet::collect(roots, out.path_failures, cfg.support_eps)
}

/// First verified root with no vanishing coordinate.
pub fn full_support_solution<R: Real>(sys: &FixedPointSystem<R>, cfg: &SolveConfig) -> Option<Element<R>> {
    let mut set = if sys.dim() <= 2 { solve_small(sys, cfg).ok()? } else { solve_numeric(sys, cfg) };
    let first = set.full_support.first().copied()?;
    Some(set.roots.swap_remove(first))
}

/// The idempotent equations `x = A^T (x∘x)` rewritten as
/// `x∘x = (A^T)^{-1} x`.
pub fn idempotent_system_of<R: Real>(alg: &EvolutionAlgebra<R>) -> Result<FixedPointSystem<R>> {
    let m = alg.structure().transpose().inverse(R::default_eps())?;
    FixedPointSystem::new(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    /// Real and imaginary parts i.i.d. `N(0, 1/2)`.
    Gaussian,
    /// Real and imaginary parts i.i.d. uniform on `[-1, 1]`.
    Uniform,
}

impl std::str::FromStr for Distribution {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "uniform" => Ok(Self::Uniform),
            other => Err(format!("unknown distribution `{other}` (expected gaussian or uniform)")),
        }
    }
}

impl Distribution {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Uniform => "uniform",
        }
    }

    fn draw<R: Real>(self, rng: &mut impl Rng) -> Complex<R> {
        match self {
            Self::Gaussian => complex_gaussian(rng),
            Self::Uniform => complex_uniform(rng),
        }
    }
}

/// Invertible matrix for sample `index`, redrawn while numerically singular.
pub fn campaign_matrix<R: Real>(n: usize, seed: u64, index: u64, dist: Distribution) -> Matrix<R> {
    let mut rng = rng_for(seed, index);
    loop {
        let m = Matrix::from_fn(n, n, |_, _| dist.draw(&mut rng));
        if m.rank_rel(R::lit(1e-9).max(R::epsilon() * R::lit(100.0))) == n {
            return m;
        }
    }
}

#[derive(Debug, Clone)]
pub struct CampaignReport<R> {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub distribution: Distribution,
    pub success_count: usize,
    /// Samples whose root count reached the Bezout number `2^n`.
    pub bezout_count: usize,
    pub path_failures: usize,
    pub failures: Vec<CampaignFailure<R>>,
    /// Wall-clock time; not part of equality.
    pub elapsed_seconds: f64,
}

impl<R: Real> PartialEq for CampaignReport<R> {
    fn eq(&self, o: &Self) -> bool {
        (self.n, self.samples, self.seed, self.distribution, self.success_count, self.bezout_count, self.path_failures)
            == (o.n, o.samples, o.seed, o.distribution, o.success_count, o.bezout_count, o.path_failures)
            && self.failures == o.failures
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignFailure<R> {
    pub index: u64,
    pub matrix: Matrix<R>,
    pub roots_found: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome<R> {
    pub matrix: Matrix<R>,
    pub solutions: SolutionSet<R>,
}

/// Solves sample `index` of a campaign.
pub fn campaign_sample<R: Real>(n: usize, seed: u64, index: u64, dist: Distribution, cfg: &SolveConfig) -> SampleOutcome<R> {
    let matrix = campaign_matrix::<R>(n, seed, index, dist);
    let sys = FixedPointSystem::new(matrix.clone()).expect("square finite matrix");
    let mut cfg = *cfg;
    cfg.track.seed = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(index);
    let solutions = if n <= 2 { solve_small(&sys, &cfg).expect("n <= 2") } else { solve_numeric(&sys, &cfg) };
    SampleOutcome { matrix, solutions }
}

fn thread_pool() -> Option<rayon::ThreadPool> {
    let n: usize = std::env::var("EVOLIB_THREADS").ok()?.parse().ok()?;
    rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().ok()
}

/// Seeded sampling campaign; results do not depend on thread count.
pub fn sample_campaign<R: Real>(
    n: usize,
    samples: usize,
    seed: u64,
    dist: Distribution,
    cfg: &SolveConfig,
) -> CampaignReport<R> {
    let start = Instant::now();
    let run = || {
        (0..samples as u64)
            .into_par_iter()
            .map(|i| (i, campaign_sample::<R>(n, seed, i, dist, cfg)))
            .collect::<Vec<_>>()
    };
    let outcomes = match thread_pool() {
        Some(pool) => pool.install(run),
        None => run(),
    };
    let bezout = 1usize.checked_shl(n as u32).unwrap_or(usize::MAX);
    let mut report = CampaignReport {
        n,
        samples,
        seed,
        distribution: dist,
        success_count: 0,
        bezout_count: 0,
        path_failures: 0,
        failures: Vec::new(),
        elapsed_seconds: 0.0,
    };
    for (index, out) in outcomes {
        report.path_failures += out.solutions.path_failures;
        if out.solutions.roots.len() == bezout {
            report.bezout_count += 1;
        }
        if out.solutions.full_support.is_empty() {
            report.failures.push(CampaignFailure { index, matrix: out.matrix, roots_found: out.solutions.roots.len() });
        } else {
            report.success_count += 1;
        }
    }
    report.elapsed_seconds = start.elapsed().as_secs_f64();
    report
}

/// Nonzero rows first, preserving relative order.
fn ordering_41<R: Real>(alg: &EvolutionAlgebra<R>, tol: &Tolerance<R>) -> (Vec<usize>, usize) {
    let nz = alg.nonzero_rows(tol);
    let order = nz.iter().copied().chain((0..alg.dim()).filter(|i| !nz.contains(i))).collect();
    (order, nz.len())
}

/// First reduction step: with the leading `k x k` minor invertible, the change
/// `e_i' = e_i + sum_{j>k} beta_{ij} e_j` (with `A_kk beta = A_tail`) splits
/// off `C^{n-k}`. Nonzero-square rows are moved first beforehand; the
/// returned change includes that reordering.
pub fn reduce_iteration1<R: Real>(
    alg: &EvolutionAlgebra<R>,
    tol: &Tolerance<R>,
) -> Result<(EvolutionAlgebra<R>, BasisChange<R>)> {
    let n = alg.dim();
    let (order, k) = ordering_41(alg, tol);
    let perm = BasisChange::permutation(&order);
    let b = alg.apply_basis_change(&perm, tol)?;
    let head: Vec<usize> = (0..k).collect();
    let tail: Vec<usize> = (k..n).collect();
    let akk = b.structure().select(&head, &head);
    if akk.rank_rel(tol.eps()) < k {
        return Err(Error::SingularMinor { order: k });
    }
    let beta = akk.solve(&b.structure().select(&head, &tail), tol.eps()).map_err(|_| Error::SingularMinor { order: k })?;
    let mut t = Matrix::identity(n);
    for i in 0..k {
        for (c, &j) in tail.iter().enumerate() {
            t[(i, j)] = beta[(i, c)];
        }
    }
    let change = perm.then(&BasisChange::for_algebra(&b, t, tol)?);
    Ok((alg.apply_basis_change(&change, tol)?, change))
}

/// One recorded step of [`reduce_pipeline`].
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ReduceStep {
    pub level: usize,
    pub action: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReduceOutcome<R> {
    /// A verified non-extendable subalgebra.
    Fails { witness: PWitness<R> },
    /// All level vectors nonzero and independent: condition P would fail if
    /// the level system has a full-support root. `witness` is present when
    /// such a root was found and verified.
    Certificate { level: usize, system: FixedPointSystem<R>, witness: Option<PWitness<R>> },
    /// Reached `ES_1 + ZN^s + C^{n-s-1}` (with `s = 1` meaning `ES_1 + C^{n-1}`).
    /// Conjectural only: earlier levels rely on the fixed-point conjecture.
    ConjecturalSatisfies { s: usize, matrix: EvolutionAlgebra<R>, change: BasisChange<R> },
    /// The input was nilpotent; the exact decision is attached.
    Nilpotent(PDecision<R>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReduceReport<R> {
    pub steps: Vec<ReduceStep>,
    pub outcome: ReduceOutcome<R>,
}

/// Level-by-level reduction of a non-nilpotent algebra.
pub fn reduce_pipeline<R: Real>(
    alg: &EvolutionAlgebra<R>,
    budget: &PBudget,
    cfg: &SolveConfig,
    tol: &Tolerance<R>,
) -> ReduceReport<R> {
    let mut steps = Vec::new();
    let mut note = |level: usize, action: String| steps.push(ReduceStep { level, action });
    if is_nilpotent(alg, tol).0 {
        note(0, "nilpotent input: exact nilpotent decision".into());
        let d = decide_p_nilpotent(alg, budget, tol).expect("nilpotency checked");
        return ReduceReport { steps, outcome: ReduceOutcome::Nilpotent(d) };
    }
    let n = alg.dim();
    let (order, k) = ordering_41(alg, tol);
    let mut change = BasisChange::permutation(&order);
    let mut b = alg.apply_basis_change(&change, tol).expect("permutation");
    note(k, format!("ordered nonzero squares first, k = {k}"));
    let fails = |gens: &[Element<R>], change: &BasisChange<R>| {
        let old: Vec<Element<R>> = gens.iter().map(|g| change.to_old(g)).collect();
        candidate_witness(alg, &old, budget, tol)
    };
    let basis = |i: usize| Element::<R>::basis(n, i);
    for t in (2..=k).rev() {
        let scale = b.scale();
        let rows: Vec<Vec<Complex<R>>> = (0..t).map(|s| b.structure().row(s)[..t].to_vec()).collect();
        let zero_rows: Vec<usize> = (0..t).filter(|&s| rows[s].iter().all(|&z| tol.is_zero(z, scale))).collect();
        let tail: Vec<Element<R>> = (t..n).map(basis).collect();
        if zero_rows.len() >= 2 {
            let mut gens = vec![basis(zero_rows[0]).add(&basis(zero_rows[1]))];
            gens.extend(tail);
            note(t, format!("rows {} and {} vanish on the first {t} coordinates", zero_rows[0], zero_rows[1]));
            if let Some(witness) = fails(&gens, &change) {
                return ReduceReport { steps, outcome: ReduceOutcome::Fails { witness } };
            }
            break;
        }
        let live: Vec<usize> = (0..t).filter(|s| !zero_rows.contains(s)).collect();
        let live_rows: Vec<Vec<Complex<R>>> = live.iter().map(|&s| rows[s].clone()).collect();
        let m = Matrix::from_rows(&live_rows, t).transpose();
        if let Some(alpha) = m.nullspace(tol.threshold(m.max_abs())).into_iter().next() {
            let mut x = Element::zero(n).into_coords();
            for (&s, &a) in live.iter().zip(&alpha) {
                x[s] = a.sqrt();
            }
            let mut gens = vec![Element::new(x)];
            gens.extend(tail);
            note(t, "nonzero level vectors are dependent".into());
            if let Some(witness) = fails(&gens, &change) {
                return ReduceReport { steps, outcome: ReduceOutcome::Fails { witness } };
            }
            break;
        }
        if zero_rows.is_empty() {
            // idempotent from a full-support root of the level system
            let idx: Vec<usize> = (0..t).collect();
            let block = b.structure().select(&idx, &idx);
            let system = idempotent_system_of(&EvolutionAlgebra::new(block).expect("finite"))
                .expect("independent level vectors give an invertible minor");
            note(t, format!("all {t} level vectors independent: fixed-point certificate"));
            let witness = full_support_solution(&system, cfg).and_then(|y| {
                let x = extend_idempotent(&b, y.coords());
                fails(&[x], &change)
            });
            return ReduceReport { steps, outcome: ReduceOutcome::Certificate { level: t, system, witness } };
        }
        // exactly one vanishing row: move it to position t-1
        let s0 = zero_rows[0];
        let mut perm: Vec<usize> = (0..n).collect();
        perm.swap(s0, t - 1);
        let p = BasisChange::permutation(&perm);
        b = b.apply_basis_change(&p, tol).expect("permutation");
        change = change.then(&p);
        note(t, format!("row {s0} vanishes on the first {t} coordinates; moved to position {}", t - 1));
    }
    let a11 = b.entry(0, 0);
    if tol.is_zero(a11, b.scale()) {
        note(1, "a11 = 0: no idempotent direction left".into());
        let d = decide_p_nilpotent(&b, budget, tol).map_err(|_| ()).ok();
        return match d {
            Some(d) => ReduceReport { steps, outcome: ReduceOutcome::Nilpotent(d) },
            None => ReduceReport {
                steps,
                outcome: ReduceOutcome::Certificate {
                    level: 1,
                    system: FixedPointSystem::new(Matrix::identity(1)).expect("1x1"),
                    witness: None,
                },
            },
        };
    }
    let scale = b.scale();
    let head_tail_nonzero = (1..k).any(|j| !tol.is_zero(b.entry(0, j), scale));
    let x0 = vec![Complex::<R>::one() / a11];
    let x = extend_idempotent(&b, &x0);
    if head_tail_nonzero {
        note(1, "idempotent through e_1 reaches later coordinates".into());
        if let Some(witness) = fails(&[x], &change) {
            return ReduceReport { steps, outcome: ReduceOutcome::Fails { witness } };
        }
    }
    // g_1 = (e_1 + w / a11) / a11 is idempotent and orthogonal to the rest
    let mut t = Matrix::identity(n);
    for j in 1..n {
        t[(0, j)] = b.entry(0, j) / a11;
    }
    t.row_mut(0).iter_mut().for_each(|z| *z = *z / a11);
    let split = match BasisChange::for_algebra(&b, t, tol) {
        Ok(s) => s,
        Err(_) => {
            // row 1 hits a non-annihilator coordinate: no split available
            note(1, "row 1 tail is not in the annihilator".into());
            return ReduceReport {
                steps,
                outcome: ReduceOutcome::Certificate {
                    level: 1,
                    system: FixedPointSystem::new(Matrix::diagonal(&[a11])).expect("1x1"),
                    witness: None,
                },
            };
        }
    };
    let b1 = b.apply_basis_change(&split, tol).expect("natural split");
    change = change.then(&split);
    let rest: Vec<usize> = (1..n).collect();
    let nil = EvolutionAlgebra::new(b1.structure().select(&rest, &rest)).expect("finite");
    note(1, format!("split ES_1 off; nilpotent remainder of dimension {}", n - 1));
    let d = match decide_p_nilpotent(&nil, budget, tol) {
        Ok(d) => d,
        Err(_) => {
            return ReduceReport {
                steps,
                outcome: ReduceOutcome::Certificate {
                    level: 1,
                    system: FixedPointSystem::new(Matrix::diagonal(&[a11])).expect("1x1"),
                    witness: None,
                },
            }
        }
    };
    match d.verdict {
        Verdict::Satisfies => {
            let cf = d.canonical.expect("satisfies carries a canonical form");
            let mut t = Matrix::identity(n);
            for i in 0..n - 1 {
                for j in 0..n - 1 {
                    t[(i + 1, j + 1)] = cf.change.matrix()[(i, j)];
                }
            }
            let inner = BasisChange::for_algebra(&b1, t, tol).expect("embedded natural change");
            change = change.then(&inner);
            let matrix = alg.apply_basis_change(&change, tol).expect("composed natural change");
            let s = if nil.nonzero_rows(tol).is_empty() { 1 } else { cf.k };
            note(1, format!("remainder is ZN^{s} plus abelian"));
            ReduceReport { steps, outcome: ReduceOutcome::ConjecturalSatisfies { s, matrix, change } }
        }
        _ => {
            let gens: Vec<Element<R>> = d
                .witness
                .map(|w| {
                    w.subspace
                        .basis()
                        .into_iter()
                        .map(|v| {
                            let mut c = vec![Complex::zero()];
                            c.extend(v.into_coords());
                            Element::new(c)
                        })
                        .collect()
                })
                .unwrap_or_default();
            note(1, "nilpotent remainder fails".into());
            match fails(&gens, &change) {
                Some(witness) => ReduceReport { steps, outcome: ReduceOutcome::Fails { witness } },
                None => ReduceReport {
                    steps,
                    outcome: ReduceOutcome::Certificate {
                        level: 1,
                        system: FixedPointSystem::new(Matrix::diagonal(&[a11])).expect("1x1"),
                        witness: None,
                    },
                },
            }
        }
    }
}

/// Extends the leading coordinates `head` of an idempotent forward through
/// `x_j = sum_{i<j} a_{ij} x_i^2`, assuming rows from `head.len()` on only
/// reach later coordinates.
fn extend_idempotent<R: Real>(b: &EvolutionAlgebra<R>, head: &[Complex<R>]) -> Element<R> {
    let n = b.dim();
    let mut x = head.to_vec();
    x.resize(n, Complex::zero());
    for j in head.len()..n {
        x[j] = (0..j).map(|i| b.entry(i, j) * x[i] * x[i]).sum();
    }
    Element::new(x)
}
