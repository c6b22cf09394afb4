//! Nilpotency via the product digraph, the power sequence `E^k`, and the
//! maximal-index shape `ZN^n`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::algebra::{EvolutionAlgebra, Subspace};
use crate::error::{Error, Result};
use crate::scalar::{Real, Tolerance};

/// Edge `i -> k` whenever `e_i^2` has a nonzero `e_k` coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductDigraph {
    succ: Vec<Vec<usize>>,
}

impl ProductDigraph {
    pub fn of<R: Real>(alg: &EvolutionAlgebra<R>, tol: &Tolerance<R>) -> Self {
        let scale = alg.scale();
        let a = alg.structure();
        let succ = (0..alg.dim())
            .map(|i| (0..alg.dim()).filter(|&k| !tol.is_zero(a[(i, k)], scale)).collect())
            .collect();
        Self { succ }
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.succ[i]
    }

    pub fn has_edge(&self, i: usize, k: usize) -> bool {
        self.succ[i].contains(&k)
    }

    /// Topological order (smallest available index first), or `None` when
    /// there is a cycle. Self-loops are cycles.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.len();
        let mut indeg = vec![0usize; n];
        for s in &self.succ {
            for &k in s {
                indeg[k] += 1;
            }
        }
        let mut ready: BinaryHeap<Reverse<usize>> = (0..n).filter(|&i| indeg[i] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(i)) = ready.pop() {
            order.push(i);
            for &k in &self.succ[i] {
                indeg[k] -= 1;
                if indeg[k] == 0 {
                    ready.push(Reverse(k));
                }
            }
        }
        (order.len() == n).then_some(order)
    }
}

/// Whether the algebra is nilpotent, with a basis order making the
/// structure matrix strictly upper triangular.
pub fn is_nilpotent<R: Real>(alg: &EvolutionAlgebra<R>, tol: &Tolerance<R>) -> (bool, Option<Vec<usize>>) {
    match ProductDigraph::of(alg, tol).topological_order() {
        Some(order) => (true, Some(order)),
        None => (false, None),
    }
}

/// Terms `E^1, E^2, ...` with `E^k = sum_{i<k} E^i E^{k-i}`.
#[derive(Debug, Clone)]
pub struct PowerSequence<R> {
    terms: Vec<Subspace<R>>,
}

impl<R: Real> PowerSequence<R> {
    /// Computes terms up to `E^cap`, stopping early at the zero space.
    pub fn compute(alg: &EvolutionAlgebra<R>, cap: usize, tol: &Tolerance<R>) -> Self {
        let mut terms = vec![Subspace::full(alg.dim())];
        while terms.len() < cap {
            let k = terms.len() + 1;
            let mut next = Subspace::zero(alg.dim());
            for i in 1..k {
                let p = alg.subspace_product(&terms[i - 1], &terms[k - i - 1], tol);
                next = next.sum(&p, tol);
            }
            let done = next.rank() == 0;
            terms.push(next);
            if done {
                break;
            }
        }
        Self { terms }
    }

    /// `E^k` for `k >= 1`.
    pub fn term(&self, k: usize) -> Option<&Subspace<R>> {
        self.terms.get(k.checked_sub(1)?)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.terms.iter().map(Subspace::rank).collect()
    }
}

/// Smallest `k` with `E^k = 0`.
///
/// `Ok(None)` means the sequence provably never vanishes (`E^2 = E`);
/// running past `cap` without a decision is [`Error::CapExceeded`].
pub fn nilpotency_index<R: Real>(alg: &EvolutionAlgebra<R>, cap: usize, tol: &Tolerance<R>) -> Result<Option<usize>> {
    let seq = PowerSequence::compute(alg, cap.max(2), tol);
    let ranks = seq.ranks();
    if let Some(k) = ranks.iter().position(|&r| r == 0) {
        return Ok(Some(k + 1));
    }
    if ranks[1] == alg.dim() {
        return Ok(None);
    }
    Err(Error::CapExceeded { cap })
}

/// Whether the structure matrix has the `ZN^n` shape: strictly upper
/// triangular, ones on the superdiagonal, zero last row, and a last column
/// that is zero apart from `a_{n-1,n} = 1`.
pub fn is_zn_form<R: Real>(alg: &EvolutionAlgebra<R>, tol: &Tolerance<R>) -> bool {
    let n = alg.dim();
    let a = alg.structure();
    let scale = alg.scale();
    let one = num_complex::Complex::new(R::one(), R::zero());
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)];
            let ok = if j == i + 1 {
                tol.is_zero(z - one, scale)
            } else if j <= i || i == n - 1 || j == n - 1 {
                tol.is_zero(z, scale)
            } else {
                true
            };
            if !ok {
                return false;
            }
        }
    }
    true
}
