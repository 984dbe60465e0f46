//! Hermitian eigendecomposition and functional calculus.
//!
//! The matrix is first split into the connected components of its nonzero
//! pattern; each component is diagonalized on its own. Diagonal entries that
//! decouple from everything else are therefore returned exactly, which keeps
//! eigenvalues spanning hundreds of orders of magnitude intact.

use super::{DenseOperator, HermitianOperator, ZERO};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

const EIGEN_EPS: f64 = 1e-15;

#[derive(Clone, Debug)]
struct Block {
    indices: Vec<usize>,
    values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]` in block coordinates.
    vectors: DMatrix<Complex64>,
    /// Absolute accuracy of the eigenvalues of this block.
    resolution: f64,
}

/// Eigenvalues (ascending) and a unitary of eigenvectors.
#[derive(Clone, Debug)]
pub struct SpectrumDecomposition {
    dim: usize,
    blocks: Vec<Block>,
    /// Global ascending order as `(block, local index)`.
    order: Vec<(usize, usize)>,
}

fn components(a: &DenseOperator) -> Vec<Vec<usize>> {
    let n = a.dim();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for (j, z) in a.row(i).iter().enumerate().skip(i + 1) {
            if *z != ZERO || a.get(j, i) != ZERO {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// Eigendecomposition of a Hermitian operator.
pub fn eigh(a: &HermitianOperator) -> Result<SpectrumDecomposition> {
    let n = a.dim();
    let mut blocks = Vec::new();
    for indices in components(a.as_dense()) {
        let k = indices.len();
        if k == 1 {
            let i = indices[0];
            blocks.push(Block {
                indices,
                values: vec![a.get(i, i).re],
                vectors: DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)),
                resolution: 0.0,
            });
            continue;
        }
        let local = DMatrix::from_fn(k, k, |r, c| a.get(indices[r], indices[c]));
        let scale = local.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let eig = local
            .try_symmetric_eigen(EIGEN_EPS, 0)
            .ok_or(Error::DecompositionFailure { block: k })?;
        blocks.push(Block {
            indices,
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
            resolution: 8.0 * k as f64 * f64::EPSILON * scale,
        });
    }
    let mut order: Vec<(usize, usize)> = blocks
        .iter()
        .enumerate()
        .flat_map(|(b, blk)| (0..blk.values.len()).map(move |l| (b, l)))
        .collect();
    order.sort_by(|x, y| {
        let vx = blocks[x.0].values[x.1];
        let vy = blocks[y.0].values[y.1];
        vx.total_cmp(&vy).then(x.cmp(y))
    });
    Ok(SpectrumDecomposition { dim: n, blocks, order })
}

impl SpectrumDecomposition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.order.iter().map(|&(b, l)| self.blocks[b].values[l]).collect()
    }

    /// Absolute accuracy estimate of each eigenvalue, in ascending order.
    pub fn resolutions(&self) -> Vec<f64> {
        self.order.iter().map(|&(b, _)| self.blocks[b].resolution).collect()
    }

    pub fn min(&self) -> f64 {
        self.order.first().map(|&(b, l)| self.blocks[b].values[l]).unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.order.last().map(|&(b, l)| self.blocks[b].values[l]).unwrap_or(0.0)
    }

    /// Largest `|λ|`.
    pub fn spectral_radius(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    /// Column `k` holds the eigenvector of the `k`-th smallest eigenvalue.
    pub fn eigenvectors(&self) -> DenseOperator {
        let mut v = DenseOperator::zeros(self.dim);
        for (col, &(b, l)) in self.order.iter().enumerate() {
            let blk = &self.blocks[b];
            for (r, &row) in blk.indices.iter().enumerate() {
                v.set(row, col, blk.vectors[(r, l)]);
            }
        }
        v
    }

    /// Eigenvectors selected by `keep(value, resolution)` as columns of an
    /// `dim × count` matrix stored column by column.
    pub fn select_vectors(&self, mut keep: impl FnMut(f64, f64) -> bool) -> Vec<Vec<Complex64>> {
        let mut out = Vec::new();
        for &(b, l) in &self.order {
            let blk = &self.blocks[b];
            if keep(blk.values[l], blk.resolution) {
                let mut col = vec![ZERO; self.dim];
                for (r, &row) in blk.indices.iter().enumerate() {
                    col[row] = blk.vectors[(r, l)];
                }
                out.push(col);
            }
        }
        out
    }

    /// `V φ(Λ) V*` where `φ` also sees the eigenvalue resolution.
    pub fn map_with(&self, mut phi: impl FnMut(f64, f64) -> f64) -> HermitianOperator {
        let mut out = DenseOperator::zeros(self.dim);
        for blk in &self.blocks {
            let mapped: Vec<f64> = blk.values.iter().map(|&v| phi(v, blk.resolution)).collect();
            let k = blk.indices.len();
            if k == 1 {
                let i = blk.indices[0];
                out.set(i, i, Complex64::new(mapped[0], 0.0));
                continue;
            }
            for r in 0..k {
                for c in r..k {
                    let mut acc = ZERO;
                    for (l, &m) in mapped.iter().enumerate() {
                        if m != 0.0 {
                            acc += blk.vectors[(r, l)] * blk.vectors[(c, l)].conj() * m;
                        }
                    }
                    out.set(blk.indices[r], blk.indices[c], acc);
                    out.set(blk.indices[c], blk.indices[r], acc.conj());
                }
            }
        }
        HermitianOperator::symmetrize(out)
    }

    pub fn map(&self, mut phi: impl FnMut(f64) -> f64) -> HermitianOperator {
        self.map_with(|v, _| phi(v))
    }

    /// Largest `‖A v - λ v‖` over eigenpairs, a cheap reconstruction check.
    pub fn residual(&self, a: &HermitianOperator) -> f64 {
        let mut worst: f64 = 0.0;
        for blk in &self.blocks {
            let k = blk.indices.len();
            for l in 0..k {
                for (r, &row) in blk.indices.iter().enumerate() {
                    let av: Complex64 =
                        blk.indices.iter().enumerate().map(|(c, &col)| a.get(row, col) * blk.vectors[(c, l)]).sum();
                    worst = worst.max((av - blk.vectors[(r, l)] * blk.values[l]).norm());
                }
            }
        }
        worst
    }
}

/// Applies a scalar function through the spectral decomposition.
///
/// Eigenvalues within their resolution of the guard interval are clamped
/// into it; anything further out is reported.
pub fn apply_scalar_function(
    a: &HermitianOperator,
    phi: impl Fn(f64) -> f64,
    domain_guard: (f64, f64),
) -> Result<HermitianOperator> {
    let (lo, hi) = domain_guard;
    let spec = eigh(a)?;
    let values = spec.eigenvalues();
    for (&v, &res) in values.iter().zip(&spec.resolutions()) {
        if v < lo - res || v > hi + res {
            return Err(Error::DomainViolation { value: v, lo, hi });
        }
    }
    Ok(spec.map(|v| phi(v.clamp(lo, hi))))
}

/// Outcome of a PSD order comparison `A ≤ B`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsdWitness {
    pub holds: bool,
    /// Smallest eigenvalue of `B - A`.
    pub min_eigenvalue: f64,
    /// Slack actually granted, `tol·(1 + ‖A‖ + ‖B‖)`.
    pub slack: f64,
}

/// Tests `A ≤ B` in the Loewner order.
pub fn psd_order_leq(a: &HermitianOperator, b: &HermitianOperator, tol: f64) -> Result<PsdWitness> {
    let diff = b.sub(a)?;
    let min_eigenvalue = eigh(&diff)?.min();
    let slack = tol * (1.0 + eigh(a)?.spectral_radius() + eigh(b)?.spectral_radius());
    Ok(PsdWitness { holds: min_eigenvalue >= -slack, min_eigenvalue, slack })
}
