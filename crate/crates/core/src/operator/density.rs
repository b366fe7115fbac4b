use super::hermitian::{BlockSpectrum, HermitianOperator};
use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};
use crate::tol::{HERM_TOL, PSD_TOL, TRACE_TOL};

/// Tensor factorization `d₁ ⊗ d₂ ⊗ … ⊗ d_N` of a composite Hilbert space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    dims: Vec<usize>,
}

impl Partition {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Dimension(format!("invalid partition {dims:?}")));
        }
        Ok(Self { dims })
    }

    pub fn bipartite(d_a: usize, d_b: usize) -> Result<Self> {
        Self::new(vec![d_a, d_b])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn check(&self, dim: usize) -> Result<()> {
        if self.total() != dim {
            return Err(Error::Dimension(format!(
                "partition {:?} has total dimension {} but operator has {dim}",
                self.dims,
                self.total()
            )));
        }
        Ok(())
    }
}

/// Positive semidefinite, unit-trace operator.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    /// Ascending, clamped, summing to one.
    spectrum: Vec<f64>,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity. Eigenvalues in
    /// `[-PSD_TOL, 0)` are clamped to zero and the spectrum renormalized.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension(format!("state must be square, got {}x{}", matrix.rows(), matrix.cols())));
        }
        let deviation = matrix.hermiticity_deviation();
        if deviation > HERM_TOL {
            return Err(Error::Hermiticity { deviation });
        }
        let matrix = matrix.hermitian_part();
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}")));
        }
        let spec = BlockSpectrum::of(&matrix);
        let min = spec.values().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        if min < 0.0 {
            let total: f64 = spec.values().map(|v| v.max(0.0)).sum();
            let matrix = spec.apply(|v| v.max(0.0) / total);
            let mut spectrum: Vec<f64> = spec.values().map(|v| v.max(0.0) / total).collect();
            spectrum.sort_by(f64::total_cmp);
            return Ok(Self { matrix, spectrum });
        }
        let mut spectrum: Vec<f64> = spec.values().collect();
        spectrum.sort_by(f64::total_cmp);
        Ok(Self { matrix, spectrum })
    }

    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("state vector has zero norm".into()));
        }
        let v: Vec<C64> = psi.iter().map(|c| c / norm).collect();
        Self::new(ComplexMatrix::outer(&v))
    }

    /// `|k⟩⟨k|` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::Dimension(format!("basis index {k} out of range for dimension {dim}")));
        }
        let mut diag = vec![0.0; dim];
        diag[k] = 1.0;
        Self::from_diag(&diag)
    }

    pub fn from_diag(p: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_diag(p))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_diag(&vec![1.0 / dim as f64; dim]).expect("maximally mixed state is valid")
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Eigenvalues in ascending order (clamped to be non-negative).
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn as_hermitian(&self) -> HermitianOperator {
        HermitianOperator::from_matrix_unchecked(self.matrix.clone())
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self::new(self.matrix.kron(&other.matrix)).expect("tensor product of states is a state")
    }

    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).map(|c| c.re).unwrap_or(f64::NAN)
    }

    /// Zero-pads into a larger space whose leading block is this one.
    pub fn embed(&self, dim: usize) -> Result<Self> {
        if dim == self.dim() {
            return Ok(self.clone());
        }
        let mut spectrum = self.spectrum.clone();
        spectrum.extend(std::iter::repeat_n(0.0, dim.saturating_sub(self.dim())));
        spectrum.sort_by(f64::total_cmp);
        Ok(Self { matrix: self.matrix.embed(dim)?, spectrum })
    }

    /// Mixture `(1−p)·self + p·other`.
    pub fn mix(&self, other: &Self, p: f64) -> Result<Self> {
        self.matrix.check_same_shape(&other.matrix)?;
        Self::new(&self.matrix.scale_real(1.0 - p) + &other.matrix.scale_real(p))
    }

    /// `½‖ρ − σ‖₁`
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        self.matrix.check_same_shape(&other.matrix)?;
        let diff = (&self.matrix - &other.matrix).hermitian_part();
        Ok(0.5 * BlockSpectrum::of(&diff).values().map(f64::abs).sum::<f64>())
    }
}

/// Reduced state on the subsystems listed in `keep` (in partition order).
pub fn partial_trace(rho: &DensityOperator, p: &Partition, keep: &[usize]) -> Result<DensityOperator> {
    p.check(rho.dim())?;
    if keep.is_empty() {
        return Err(Error::Dimension("partial trace must keep at least one subsystem".into()));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() || *keep_sorted.last().unwrap() >= p.len() {
        return Err(Error::Dimension(format!("invalid subsystem set {keep:?} for {} factors", p.len())));
    }
    let dims = p.dims();
    let d_keep: usize = keep_sorted.iter().map(|&k| dims[k]).product();
    let d_traced = rho.dim() / d_keep;

    // (kept index, traced index) of every composite basis index
    let mut split = Vec::with_capacity(rho.dim());
    for i in 0..rho.dim() {
        let mut rem = i;
        let mut digits = vec![0; dims.len()];
        for f in (0..dims.len()).rev() {
            digits[f] = rem % dims[f];
            rem /= dims[f];
        }
        let (mut ki, mut ti) = (0, 0);
        for f in 0..dims.len() {
            if keep_sorted.binary_search(&f).is_ok() {
                ki = ki * dims[f] + digits[f];
            } else {
                ti = ti * dims[f] + digits[f];
            }
        }
        split.push((ki, ti));
    }
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(d_keep); d_traced];
    for (i, &(ki, ti)) in split.iter().enumerate() {
        groups[ti].push((i, ki));
    }
    let m = rho.matrix();
    let mut out = ComplexMatrix::zeros(d_keep, d_keep);
    for group in &groups {
        for &(i, ki) in group {
            for &(j, kj) in group {
                let v = m[(i, j)];
                if v != ZERO {
                    out[(ki, kj)] += v;
                }
            }
        }
    }
    DensityOperator::new(out)
}
