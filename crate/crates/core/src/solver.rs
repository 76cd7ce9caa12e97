//! Dense symmetric eigensolution of the per-irrep blocks.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::d3d::Irrep;
use crate::exec::Execution;
use crate::matelem::{BlockSet, HamiltonianBlock};
use crate::{check_lambda, Error, Result};

/// Ascending eigenpairs of one block at one `λ`.
#[derive(Debug, Clone)]
pub struct BlockEigen {
    pub irrep: Irrep,
    pub row: usize,
    pub lambda: f64,
    pub values: Vec<f64>,
    /// Column `k` belongs to `values[k]`.
    pub vectors: DMatrix<f64>,
}

/// Eigenpairs of a symmetric matrix, ascending, with the first component of
/// magnitude above `1e-12` of each eigenvector made positive.
pub(crate) fn symmetric_eigen(h: DMatrix<f64>) -> Option<(Vec<f64>, DMatrix<f64>)> {
    let n = h.nrows();
    if n == 0 {
        return Some((Vec::new(), DMatrix::zeros(0, 0)));
    }
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 1000 * n.max(10))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let sign = col
            .iter()
            .find(|x| x.abs() > 1e-12)
            .map_or(1.0, |x| x.signum());
        vectors.set_column(dst, &(col * sign));
    }
    Some((values, vectors))
}

/// Ascending eigenvalues only.
pub(crate) fn symmetric_eigenvalues(h: DMatrix<f64>) -> Vec<f64> {
    if h.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Diagonalize `H0 + λW` of one block.
pub fn eigensolve_block(block: &HamiltonianBlock, lambda: f64) -> Result<BlockEigen> {
    check_lambda(lambda)?;
    let (values, vectors) = symmetric_eigen(block.hamiltonian(lambda)).ok_or_else(|| Error::NoConvergence {
        irrep: block.irrep,
        lambda,
        detail: format!("no convergence for a {}x{} block", block.dim(), block.dim()),
    })?;
    Ok(BlockEigen {
        irrep: block.irrep,
        row: block.row,
        lambda,
        values,
        vectors,
    })
}

/// Eigenvalues of `H0 + λW` of one block, without vectors.
pub fn block_eigenvalues(block: &HamiltonianBlock, lambda: f64) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    Ok(symmetric_eigenvalues(block.hamiltonian(lambda)))
}

impl BlockEigen {
    /// Largest residual `‖Hv - Ev‖` over all eigenpairs.
    pub fn max_residual(&self, block: &HamiltonianBlock) -> f64 {
        let h = block.hamiltonian(self.lambda);
        let mut worst: f64 = 0.0;
        for (k, e) in self.values.iter().enumerate() {
            let v = self.vectors.column(k);
            worst = worst.max((&h * v - v * *e).norm());
        }
        worst
    }

    /// Largest entry of `VᵀV - I`.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.values.len();
        if n == 0 {
            return 0.0;
        }
        (self.vectors.transpose() * &self.vectors - DMatrix::identity(n, n)).amax()
    }
}

/// Sorted eigenvalues of every row block at one `λ`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSlice {
    pub lambda: f64,
    pub cutoff: u32,
    /// `(irrep, row, ascending eigenvalues)` in row-block order.
    pub blocks: Vec<(Irrep, usize, Vec<f64>)>,
}

impl SpectrumSlice {
    /// Eigenvalues of one irrep (row 0).
    pub fn irrep(&self, irrep: Irrep) -> &[f64] {
        self.blocks
            .iter()
            .find(|(i, r, _)| *i == irrep && *r == 0)
            .map(|(_, _, v)| v.as_slice())
            .unwrap_or(&[])
    }

    /// All eigenvalues with multiplicity (`E` rows counted separately), ascending.
    pub fn merged(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.blocks.iter().flat_map(|(_, _, v)| v.iter().copied()).collect();
        all.sort_by(f64::total_cmp);
        all
    }

    pub fn ground_state(&self) -> Option<(Irrep, f64)> {
        self.blocks
            .iter()
            .filter_map(|(i, _, v)| v.first().map(|e| (*i, *e)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

impl BlockSet {
    /// Solve row 0 of each irrep and copy the result to row 1 of `E` irreps.
    pub fn solve(&self, lambda: f64, exec: Execution) -> Result<SpectrumSlice> {
        check_lambda(lambda)?;
        let primary: Vec<&HamiltonianBlock> = self.primary_blocks().collect();
        let solved = exec.try_map(&primary, |b| block_eigenvalues(b, lambda))?;
        let mut blocks = Vec::new();
        for (b, values) in primary.iter().zip(solved) {
            for row in b.irrep.rows() {
                blocks.push((b.irrep, row, values.clone()));
            }
        }
        Ok(SpectrumSlice {
            lambda,
            cutoff: self.cutoff,
            blocks,
        })
    }
}

/// Assemble every block up to `cutoff` and solve at `λ`.
pub fn spectrum_at(lambda: f64, cutoff: u32) -> Result<SpectrumSlice> {
    check_lambda(lambda)?;
    BlockSet::new(cutoff)?.solve(lambda, Execution::default())
}
