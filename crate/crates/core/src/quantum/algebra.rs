//! Finite-dimensional C*-algebras as direct sums of full matrix blocks.

use crate::error::{KsError, Result};
use crate::linalg::CMatrix;

/// A direct sum of full matrix blocks; elements are block-diagonal matrices
/// over the total dimension. The abelian case is `block_dims = [1; n]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteDimAlgebra {
    block_dims: Vec<usize>,
}

impl FiniteDimAlgebra {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() || block_dims.iter().any(|&d| d == 0) {
            return Err(KsError::InvalidSystem(
                "block dimensions must be nonempty and positive".into(),
            ));
        }
        Ok(Self { block_dims })
    }

    /// One full matrix block.
    pub fn full(dim: usize) -> Result<Self> {
        Self::new(vec![dim])
    }

    /// The diagonal (abelian) algebra of dimension `n`.
    pub fn diagonal(n: usize) -> Result<Self> {
        Self::new(vec![1; n])
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn total_dim(&self) -> usize {
        self.block_dims.iter().sum()
    }

    pub fn is_abelian(&self) -> bool {
        self.block_dims.iter().all(|&d| d == 1)
    }

    /// `(offset, dim)` of each block.
    pub fn block_ranges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.block_dims.len());
        let mut offset = 0;
        for &d in &self.block_dims {
            out.push((offset, d));
            offset += d;
        }
        out
    }

    /// Largest entry outside the block-diagonal pattern.
    pub fn off_block_residual(&self, m: &CMatrix) -> f64 {
        let mut worst = 0.0f64;
        let ranges = self.block_ranges();
        for (bi, &(oi, di)) in ranges.iter().enumerate() {
            for (bj, &(oj, dj)) in ranges.iter().enumerate() {
                if bi == bj {
                    continue;
                }
                for r in oi..oi + di {
                    for c in oj..oj + dj {
                        worst = worst.max(m[(r, c)].norm());
                    }
                }
            }
        }
        worst
    }

    pub fn check_block_diagonal(&self, m: &CMatrix, tol: f64, what: &str) -> Result<()> {
        if m.nrows() != self.total_dim() || m.ncols() != self.total_dim() {
            return Err(KsError::ShapeMismatch(format!(
                "{what} is {}x{}, algebra dimension is {}",
                m.nrows(),
                m.ncols(),
                self.total_dim()
            )));
        }
        let residual = self.off_block_residual(m);
        if residual > tol {
            return Err(KsError::InvalidSystem(format!(
                "{what} is not block-diagonal: off-block residual {residual:.3e}"
            )));
        }
        Ok(())
    }

    /// Copy of one block of a block-diagonal matrix.
    pub fn block_of(&self, m: &CMatrix, block: usize) -> CMatrix {
        let (offset, dim) = self.block_ranges()[block];
        m.view((offset, offset), (dim, dim)).into_owned()
    }

    /// Checks that conjugation by `u` is an automorphism of the algebra:
    /// the block pattern of `u` must be a permutation between blocks of
    /// equal dimension (identity permutation = block-diagonal = inner).
    /// Returns the permutation: entry `j` is the source block mapped onto
    /// target block `j`.
    pub fn check_automorphism_pattern(&self, u: &CMatrix, tol: f64) -> Result<Vec<usize>> {
        if u.nrows() != self.total_dim() || u.ncols() != self.total_dim() {
            return Err(KsError::ShapeMismatch(format!(
                "unitary is {}x{}, algebra dimension is {}",
                u.nrows(),
                u.ncols(),
                self.total_dim()
            )));
        }
        let ranges = self.block_ranges();
        let n = ranges.len();
        let block_norm = |ti: usize, sj: usize| -> f64 {
            let (oi, di) = ranges[ti];
            let (oj, dj) = ranges[sj];
            let mut worst = 0.0f64;
            for r in oi..oi + di {
                for c in oj..oj + dj {
                    worst = worst.max(u[(r, c)].norm());
                }
            }
            worst
        };
        let mut source_of = vec![usize::MAX; n];
        let mut used = vec![false; n];
        for ti in 0..n {
            for sj in 0..n {
                if block_norm(ti, sj) > tol {
                    if source_of[ti] != usize::MAX || used[sj] {
                        return Err(KsError::InvalidSystem(
                            "unitary does not permute algebra blocks".into(),
                        ));
                    }
                    if ranges[ti].1 != ranges[sj].1 {
                        return Err(KsError::InvalidSystem(
                            "unitary maps between blocks of different dimension".into(),
                        ));
                    }
                    source_of[ti] = sj;
                    used[sj] = true;
                }
            }
        }
        if source_of.iter().any(|&s| s == usize::MAX) {
            return Err(KsError::InvalidSystem(
                "unitary vanishes on some algebra block".into(),
            ));
        }
        Ok(source_of)
    }

    pub fn describe(&self) -> String {
        if self.is_abelian() {
            format!("diagonal({})", self.total_dim())
        } else {
            format!("blocks{:?}", self.block_dims)
        }
    }
}
