use nalgebra::{DMatrix, SymmetricEigen};

use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};
use crate::tol::HERM_TOL;

/// Self-adjoint operator: Hamiltonians, observables, logarithms of states.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    /// Validates Hermiticity to [`HERM_TOL`] per entry, then symmetrizes.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension(format!(
                "Hermitian operator must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let deviation = matrix.hermiticity_deviation();
        if deviation > HERM_TOL {
            return Err(Error::Hermiticity { deviation });
        }
        Ok(Self { matrix: matrix.hermitian_part() })
    }

    /// Caller guarantees Hermiticity up to round-off.
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.hermiticity_deviation() < 1e-8);
        Self { matrix: matrix.hermitian_part() }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self { matrix: ComplexMatrix::from_real_diag(diag) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self { matrix: self.matrix.kron(&other.matrix) }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { matrix: self.matrix.scale_real(s) }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.matrix.check_same_shape(&other.matrix)?;
        Ok(Self { matrix: &self.matrix + &other.matrix })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.matrix.check_same_shape(&other.matrix)?;
        Ok(Self { matrix: &self.matrix - &other.matrix })
    }

    /// `tr[ρ H]` for any square matrix of matching size; real part only.
    pub fn expectation(&self, rho: &ComplexMatrix) -> Result<f64> {
        Ok(self.matrix.trace_product(rho)?.re)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut vals: Vec<f64> =
            BlockSpectrum::of(&self.matrix).blocks.into_iter().flat_map(|b| b.values).collect();
        vals.sort_by(f64::total_cmp);
        vals
    }

    /// Spectral norm `max |λ|`.
    pub fn norm(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Eigenvalues in ascending order with orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    /// `V diag(λ) V†`
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| x)
    }

    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        let fvals: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| v[(i, k)] * fvals[k] * v[(j, k)].conj()).sum()
        })
    }
}

/// Eigendecomposition restricted to the connected components of the
/// operator's exact nonzero pattern. Block-diagonal operators (conserved
/// quantum numbers, Fock-diagonal states) decompose block by block.
#[derive(Clone, Debug)]
pub(crate) struct BlockSpectrum {
    pub dim: usize,
    pub blocks: Vec<Block>,
}

#[derive(Clone, Debug)]
pub(crate) struct Block {
    pub idx: Vec<usize>,
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]` in block coordinates.
    pub vectors: ComplexMatrix,
}

impl BlockSpectrum {
    pub fn of(m: &ComplexMatrix) -> Self {
        let n = m.rows();
        let components = components(m);
        let blocks = components
            .into_iter()
            .map(|idx| {
                if idx.len() == 1 {
                    let i = idx[0];
                    return Block { values: vec![m[(i, i)].re], vectors: ComplexMatrix::identity(1), idx };
                }
                let sub = m.principal_submatrix(&idx).hermitian_part();
                let b = idx.len();
                let dm = DMatrix::<C64>::from_fn(b, b, |i, j| sub[(i, j)]);
                let eig = SymmetricEigen::new(dm);
                let vectors = ComplexMatrix::from_fn(b, b, |i, j| eig.eigenvectors[(i, j)]);
                Block { idx, values: eig.eigenvalues.iter().copied().collect(), vectors }
            })
            .collect();
        Self { dim: n, blocks }
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.blocks.iter().flat_map(|b| b.values.iter().copied())
    }

    /// `Σ_k f(λ_k) |v_k⟩⟨v_k|`, block by block.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for block in &self.blocks {
            let fv: Vec<f64> = block.values.iter().map(|&l| f(l)).collect();
            let b = block.idx.len();
            for a in 0..b {
                for c in 0..b {
                    let mut acc = ZERO;
                    for k in 0..b {
                        if fv[k] != 0.0 {
                            acc += block.vectors[(a, k)] * fv[k] * block.vectors[(c, k)].conj();
                        }
                    }
                    out[(block.idx[a], block.idx[c])] = acc;
                }
            }
        }
        out
    }

    pub fn into_decomposition(self) -> SpectralDecomposition {
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(self.dim);
        for (bi, block) in self.blocks.iter().enumerate() {
            for (k, &v) in block.values.iter().enumerate() {
                pairs.push((v, bi, k));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut vectors = ComplexMatrix::zeros(self.dim, self.dim);
        for (col, &(_, bi, k)) in pairs.iter().enumerate() {
            let block = &self.blocks[bi];
            for (a, &row) in block.idx.iter().enumerate() {
                vectors[(row, col)] = block.vectors[(a, k)];
            }
        }
        SpectralDecomposition { eigenvalues: pairs.iter().map(|p| p.0).collect(), eigenvectors: vectors }
    }
}

/// Connected components of the graph with an edge wherever `m[i,j] != 0`.
fn components(m: &ComplexMatrix) -> Vec<Vec<usize>> {
    let n = m.rows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if m[(i, j)] != ZERO || m[(j, i)] != ZERO {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = find(&mut parent, i);
        groups[r].push(i);
    }
    groups.into_iter().filter(|g| !g.is_empty()).collect()
}

pub fn hermitian_eig(h: &HermitianOperator) -> SpectralDecomposition {
    BlockSpectrum::of(h.matrix()).into_decomposition()
}

/// Validates Hermiticity first; the entry point for raw matrices.
pub fn hermitian_eig_matrix(m: &ComplexMatrix) -> Result<SpectralDecomposition> {
    Ok(hermitian_eig(&HermitianOperator::new(m.clone())?))
}

/// `V f(Λ) V†`. Any non-finite `f(λ)` is a domain error.
pub fn op_func(h: &HermitianOperator, f: impl Fn(f64) -> f64) -> Result<HermitianOperator> {
    let spec = BlockSpectrum::of(h.matrix());
    if let Some(bad) = spec.values().find(|&l| !f(l).is_finite()) {
        return Err(Error::Domain(format!("f({bad}) is not finite")));
    }
    Ok(HermitianOperator::from_matrix_unchecked(spec.apply(f)))
}
