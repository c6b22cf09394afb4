//! Algebras `E_{n,pi}(a)` with `e_i^2 = a_i e_{pi(i)}` and their splitting
//! into cyclic blocks `ES_p` and chains `EN_k`.

use num_complex::Complex;
use num_traits::Zero;

use crate::algebra::{BasisChange, EvolutionAlgebra};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{Real, Tolerance};

/// Indices are zero-based.
#[derive(Debug, Clone, PartialEq)]
pub struct PermutationSpec<R> {
    pub pi: Vec<usize>,
    pub a: Vec<Complex<R>>,
}

impl<R: Real> PermutationSpec<R> {
    pub fn new(pi: Vec<usize>, a: Vec<Complex<R>>) -> Result<Self> {
        let n = pi.len();
        if a.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: a.len() });
        }
        if n == 0 {
            return Err(Error::EmptyAlgebra);
        }
        let mut seen = vec![false; n];
        for &p in &pi {
            if p >= n || seen[p] {
                return Err(Error::InvalidPermutation(format!("{pi:?} is not a bijection of 0..{n}")));
            }
            seen[p] = true;
        }
        Ok(Self { pi, a })
    }

    pub fn dim(&self) -> usize {
        self.pi.len()
    }

    /// Reads a structure matrix with at most one nonzero per row, in
    /// distinct columns. Zero rows are assigned the unused columns.
    pub fn recognize(alg: &EvolutionAlgebra<R>, tol: &Tolerance<R>) -> Option<Self> {
        let n = alg.dim();
        let scale = alg.scale();
        let s = alg.structure();
        let mut pi = vec![usize::MAX; n];
        let mut a = vec![Complex::zero(); n];
        let mut used = vec![false; n];
        for i in 0..n {
            let nz: Vec<usize> = (0..n).filter(|&k| !tol.is_zero(s[(i, k)], scale)).collect();
            match nz.as_slice() {
                [] => {}
                [k] if !used[*k] => {
                    used[*k] = true;
                    pi[i] = *k;
                    a[i] = s[(i, *k)];
                }
                _ => return None,
            }
        }
        let mut free = (0..n).filter(|&k| !used[k]);
        for p in pi.iter_mut().filter(|p| **p == usize::MAX) {
            *p = free.next()?;
        }
        Self::new(pi, a).ok()
    }
}

pub fn build<R: Real>(spec: &PermutationSpec<R>) -> EvolutionAlgebra<R> {
    let n = spec.dim();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        m[(i, spec.pi[i])] = spec.a[i];
    }
    EvolutionAlgebra::new(m).expect("finite coefficients")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum BlockKind {
    Cycle,
    Chain,
}

/// A summand together with the vertices it occupies, in block order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub kind: BlockKind,
    pub vertices: Vec<usize>,
}

impl Block {
    pub fn size(&self) -> usize {
        self.vertices.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport<R> {
    /// `ES_p` sizes, descending.
    pub cycles: Vec<usize>,
    /// `EN_k` sizes, descending; `EN_1` is the one-dimensional abelian
    /// algebra.
    pub chains: Vec<usize>,
    /// Blocks in canonical order: cycles, then chains, each descending.
    pub blocks: Vec<Block>,
    pub witness: BasisChange<R>,
}

fn blocks_of<R: Real>(spec: &PermutationSpec<R>, tol: &Tolerance<R>) -> Vec<Block> {
    let n = spec.dim();
    let scale = spec.a.iter().map(|z| z.norm()).fold(R::zero(), R::max);
    let active: Vec<bool> = spec.a.iter().map(|&z| !tol.is_zero(z, scale)).collect();
    let mut pred = vec![0; n];
    for i in 0..n {
        pred[spec.pi[i]] = i;
    }
    let mut seen = vec![false; n];
    let mut blocks = Vec::new();
    // chains start where the incoming edge is inactive
    for v in 0..n {
        if active[pred[v]] {
            continue;
        }
        let mut vertices = vec![v];
        seen[v] = true;
        let mut cur = v;
        while active[cur] {
            cur = spec.pi[cur];
            seen[cur] = true;
            vertices.push(cur);
        }
        blocks.push(Block { kind: BlockKind::Chain, vertices });
    }
    for v in 0..n {
        if seen[v] {
            continue;
        }
        let mut vertices = Vec::new();
        let mut cur = v;
        while !seen[cur] {
            seen[cur] = true;
            vertices.push(cur);
            cur = spec.pi[cur];
        }
        blocks.push(Block { kind: BlockKind::Cycle, vertices });
    }
    blocks.sort_by(|x, y| {
        let rank = |b: &Block| (b.kind == BlockKind::Chain, std::cmp::Reverse(b.size()), b.vertices[0]);
        rank(x).cmp(&rank(y))
    });
    blocks
}

/// Scalings `lambda_j` along a block so that `f_j = lambda_j e_{v_j}`
/// satisfies `f_j^2 = f_{j+1}`, in log form.
fn block_scalings<R: Real>(spec: &PermutationSpec<R>, block: &Block) -> Vec<Complex<R>> {
    let p = block.size();
    let logs: Vec<Complex<R>> = block.vertices.iter().map(|&v| spec.a[v].ln()).collect();
    let two = R::lit(2.0);
    // offsets b_j with log lambda_j = 2^j x + b_j
    let mut b = vec![Complex::zero(); p];
    for j in 1..p {
        b[j] = b[j - 1].scale(two) + logs[j - 1];
    }
    let x = match block.kind {
        BlockKind::Cycle => {
            // lambda_p^2 a_p closes the loop back to lambda_1
            let closing = b[p - 1].scale(two) + logs[p - 1];
            let denom = two.powi(p as i32) - R::one();
            -closing / denom
        }
        BlockKind::Chain => {
            // free head scaling: least-squares on log moduli
            let mut num = R::zero();
            let mut den = R::zero();
            for (j, bj) in b.iter().enumerate() {
                let w = two.powi(j as i32);
                num = num + w * bj.re;
                den = den + w * w;
            }
            Complex::new(-num / den, R::zero())
        }
    };
    (0..p).map(|j| (x.scale(two.powi(j as i32)) + b[j]).exp()).collect()
}

/// Natural basis change to the canonical direct sum of the blocks.
pub fn realize_isomorphism<R: Real>(spec: &PermutationSpec<R>, tol: &Tolerance<R>) -> BasisChange<R> {
    realize_blocks(spec, &blocks_of(spec, tol))
}

fn realize_blocks<R: Real>(spec: &PermutationSpec<R>, blocks: &[Block]) -> BasisChange<R> {
    let mut by_vertex = vec![Complex::zero(); spec.dim()];
    for block in blocks {
        for (&v, lambda) in block.vertices.iter().zip(block_scalings(spec, block)) {
            by_vertex[v] = lambda;
        }
    }
    let order: Vec<usize> = blocks.iter().flat_map(|b| b.vertices.iter().copied()).collect();
    BasisChange::diagonal(&by_vertex).then(&BasisChange::permutation(&order))
}

pub fn decompose<R: Real>(spec: &PermutationSpec<R>, tol: &Tolerance<R>) -> DecompositionReport<R> {
    let blocks = blocks_of(spec, tol);
    let witness = realize_blocks(spec, &blocks);
    let sizes = |k| blocks.iter().filter(|b| b.kind == k).map(Block::size).collect();
    DecompositionReport { cycles: sizes(BlockKind::Cycle), chains: sizes(BlockKind::Chain), blocks, witness }
}

/// `ES_p`: `e_i^2 = e_{i+1}`, `e_p^2 = e_1`.
pub fn es<R: Real>(p: usize) -> EvolutionAlgebra<R> {
    let one = Complex::new(R::one(), R::zero());
    EvolutionAlgebra::new(Matrix::from_fn(p, p, |i, j| if j == (i + 1) % p { one } else { Complex::zero() })).unwrap()
}

/// `EN_k`: `e_i^2 = e_{i+1}`, `e_k^2 = 0`.
pub fn en<R: Real>(k: usize) -> EvolutionAlgebra<R> {
    let one = Complex::new(R::one(), R::zero());
    EvolutionAlgebra::new(Matrix::from_fn(k, k, |i, j| if j == i + 1 { one } else { Complex::zero() })).unwrap()
}

/// Canonical direct sum `ES_{p_1} + ... + EN_{k_1} + ...`.
pub fn canonical_sum<R: Real>(cycles: &[usize], chains: &[usize]) -> EvolutionAlgebra<R> {
    let mut parts = cycles.iter().map(|&p| es(p)).chain(chains.iter().map(|&k| en(k)));
    let first = parts.next().expect("at least one block");
    parts.fold(first, |acc, b| acc.direct_sum(&b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    fn spec(pi: &[usize], a: &[f64]) -> PermutationSpec<f64> {
        PermutationSpec::new(pi.to_vec(), a.iter().map(|&x| cplx(x, 0.)).collect()).unwrap()
    }

    fn verify(s: &PermutationSpec<f64>) -> DecompositionReport<f64> {
        let t = Tolerance::default();
        let rep = decompose(s, &t);
        assert_eq!(rep.cycles.iter().sum::<usize>() + rep.chains.iter().sum::<usize>(), s.dim());
        let got = build(s).apply_basis_change(&rep.witness, &t).unwrap();
        let want = canonical_sum::<f64>(&rep.cycles, &rep.chains);
        assert!(got.structure().max_diff(want.structure()) < 1e-9, "{:?}", got.structure());
        rep
    }

    #[test]
    fn build_examples() {
        assert_eq!(build(&spec(&[0, 1, 2], &[1., 1., 1.])).structure(), &Matrix::identity(3));
        assert_eq!(build(&spec(&[1, 2, 0], &[1., 1., 1.])), es(3));
        assert!(PermutationSpec::<f64>::new(vec![0, 0], vec![cplx(1., 0.); 2]).is_err());
    }

    #[test]
    fn decompositions() {
        let r = verify(&spec(&[0, 1, 2], &[2., -1., 0.5]));
        assert_eq!((r.cycles, r.chains), (vec![1, 1, 1], vec![]));
        let r = verify(&spec(&[0, 1], &[0., 0.]));
        assert_eq!((r.cycles, r.chains), (vec![], vec![1, 1]));
        let r = verify(&spec(&[1, 2, 0], &[1., 1., 0.]));
        assert_eq!((r.cycles, r.chains), (vec![], vec![3]));
        let r = verify(&spec(&[1, 2, 0], &[2., 3., 0.]));
        assert_eq!(r.chains, vec![3]);
        let r = verify(&spec(&[1, 0], &[4., 1.]));
        assert_eq!(r.cycles, vec![2]);
    }

    #[test]
    fn mixed_blocks_in_canonical_order() {
        // cycle (0 1), chain 2 -> 4 -> 3, fixed point 5
        let r = verify(&spec(&[1, 0, 4, 2, 3, 5], &[1., 2., 3., 0., -1., 0.]));
        assert_eq!(r.cycles, vec![2]);
        assert_eq!(r.chains, vec![3, 1]);
        assert_eq!(r.blocks[1].vertices, vec![2, 4, 3]);
    }

    #[test]
    fn unit_coefficients_need_only_a_permutation() {
        let s = spec(&[2, 0, 1], &[1., 1., 1.]);
        let rep = verify(&s);
        for z in rep.witness.matrix().entries() {
            assert!(z.norm() < 1e-12 || (z.norm() - 1.).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_cycle_coefficients() {
        let s = PermutationSpec::new(vec![1, 2, 3, 0], vec![cplx(0.5, 1.5), cplx(-2., 0.), cplx(0., -1.), cplx(1.7, 0.3)]).unwrap();
        verify(&s);
    }

    #[test]
    fn recognize_round_trip() {
        let s = spec(&[1, 2, 0], &[2., 3., 0.]);
        let back = PermutationSpec::recognize(&build(&s), &Tolerance::default()).unwrap();
        assert_eq!(build(&back), build(&s));
        let not = EvolutionAlgebra::<f64>::from_real_rows(&[&[1., 1.], &[0., 0.]]).unwrap();
        assert!(PermutationSpec::recognize(&not, &Tolerance::default()).is_none());
    }
}
