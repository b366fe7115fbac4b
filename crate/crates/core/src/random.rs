//! Seeded random instances: states, unitaries and Hamiltonians.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::operator::{ComplexMatrix, DensityOperator, HermitianOperator, C64};

pub type InstanceRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of `seed`; instance results do not depend on
/// which thread draws them.
pub fn stream(seed: u64, stream: u64) -> InstanceRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
}

pub fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// GUE-like Hermitian matrix with entries of size ~`scale`.
pub fn random_hermitian(rng: &mut impl Rng, dim: usize, scale: f64) -> HermitianOperator {
    let g = ginibre(rng, dim, dim);
    HermitianOperator::new(g.hermitian_part().scale_real(scale)).expect("Hermitian part")
}

/// Random Hermitian operator rescaled to spectral norm one.
pub fn random_bounded_hamiltonian(rng: &mut impl Rng, dim: usize) -> HermitianOperator {
    let h = random_hermitian(rng, dim, 1.0);
    let n = h.norm();
    if n == 0.0 {
        h
    } else {
        h.scale(1.0 / n)
    }
}

/// `GG†/tr(GG†)` with `G` a dim×rank Ginibre matrix.
pub fn random_density(rng: &mut impl Rng, dim: usize, rank: usize) -> DensityOperator {
    let g = ginibre(rng, dim, rank.max(1));
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    DensityOperator::new(w.scale_real(1.0 / tr).hermitian_part()).expect("Wishart state")
}

pub fn random_pure(rng: &mut impl Rng, dim: usize) -> DensityOperator {
    let v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
    DensityOperator::pure(&v).expect("nonzero vector")
}

/// Haar-distributed unitary via Gram–Schmidt on a Ginibre matrix.
pub fn haar_unitary(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    let g = ginibre(rng, dim, dim);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut v: Vec<C64> = (0..dim).map(|i| g[(i, j)]).collect();
        // two passes keep the columns orthonormal to round-off
        for _ in 0..2 {
            for q in &cols {
                let overlap: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= overlap * qi;
                }
            }
        }
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|c| c / norm).collect());
    }
    ComplexMatrix::from_fn(dim, dim, |i, j| cols[j][i])
}
