//! Dense complex-matrix kernel: tensor algebra, partial trace, Hermitian
//! spectral decomposition, operator functions and unitary evolution.
//!
//! All spectral work goes through one eigensolver that first splits an
//! operator along the connected components of its exact nonzero pattern.
//! Storage stays dense; the splitting only changes how much work an
//! eigendecomposition of a block-diagonal operator costs.

mod density;
mod evolution;
mod hermitian;
mod matrix;

pub use density::{partial_trace, DensityOperator, Partition};
pub use evolution::{evolve, propagator, unitarity_deviation, Propagator};
pub use hermitian::{hermitian_eig, hermitian_eig_matrix, op_func, HermitianOperator, SpectralDecomposition};
pub use matrix::{ops, ComplexMatrix, C64};

pub(crate) use hermitian::BlockSpectrum;
