use super::density::DensityOperator;
use super::hermitian::{hermitian_eig, HermitianOperator, SpectralDecomposition};
use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};
use crate::tol::UNITARY_TOL;

/// `e^{−iHt}` (ħ = 1) for a fixed Hamiltonian, from one spectral decomposition.
#[derive(Clone, Debug)]
pub struct Propagator {
    spectral: SpectralDecomposition,
    adjoint: ComplexMatrix,
}

impl Propagator {
    pub fn new(h: &HermitianOperator) -> Self {
        let spectral = hermitian_eig(h);
        let adjoint = spectral.eigenvectors.adjoint();
        Self { spectral, adjoint }
    }

    pub fn dim(&self) -> usize {
        self.spectral.eigenvalues.len()
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    pub fn at(&self, t: f64) -> ComplexMatrix {
        let v = &self.spectral.eigenvectors;
        let phases: Vec<C64> = self.spectral.eigenvalues.iter().map(|&l| C64::from_polar(1.0, -l * t)).collect();
        let vd = ComplexMatrix::from_fn(v.rows(), v.cols(), |i, k| v[(i, k)] * phases[k]);
        vd.matmul(&self.adjoint).expect("square propagator")
    }

    /// `V†ρV`, the state in the eigenbasis of the generator.
    pub fn to_eigenbasis(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        // V†(V†ρ)† = V†ρV for Hermitian ρ; both products have the sparse factor on the left.
        let left = self.adjoint.matmul(rho)?;
        self.adjoint.matmul(&left.adjoint())
    }

    /// Evolved state `U(t) ρ U(t)†` given `ρ̃ = V†ρV`.
    pub fn state_at(&self, rho_tilde: &ComplexMatrix, t: f64) -> Result<DensityOperator> {
        let lam = &self.spectral.eigenvalues;
        let m = ComplexMatrix::from_fn(rho_tilde.rows(), rho_tilde.cols(), |j, k| {
            let x = rho_tilde[(j, k)];
            if x == super::matrix::ZERO {
                x
            } else {
                x * C64::from_polar(1.0, -(lam[j] - lam[k]) * t)
            }
        });
        let v = &self.spectral.eigenvectors;
        let b = v.matmul(&m)?;
        DensityOperator::new(v.matmul(&b.adjoint())?)
    }
}

pub fn propagator(h: &HermitianOperator, t: f64) -> ComplexMatrix {
    Propagator::new(h).at(t)
}

/// `‖U†U − I‖_F`
pub fn unitarity_deviation(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let g = &u.adjoint() * u;
    (&g - &ComplexMatrix::identity(u.rows())).frobenius_norm()
}

/// `UρU†`, rejecting `U` that is not unitary to [`UNITARY_TOL`].
pub fn evolve(rho: &DensityOperator, u: &ComplexMatrix) -> Result<DensityOperator> {
    if u.rows() != rho.dim() || u.cols() != rho.dim() {
        return Err(Error::Dimension(format!(
            "{}x{} unitary on a {}-dimensional state",
            u.rows(),
            u.cols(),
            rho.dim()
        )));
    }
    let deviation = unitarity_deviation(u);
    if deviation > UNITARY_TOL {
        return Err(Error::Unitarity { deviation });
    }
    let left = u.matmul(rho.matrix())?;
    DensityOperator::new(left.matmul(&u.adjoint())?)
}
