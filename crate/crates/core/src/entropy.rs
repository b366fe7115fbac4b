//! Entropy and information functionals, all in nats.

use crate::error::{Error, Result};
use crate::operator::{partial_trace, BlockSpectrum, DensityOperator, Partition, C64};
use crate::tol::{CORR_CLAMP, SUPP_TOL};

/// An entropy in nats together with its thermodynamic value `k·S`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyValue {
    pub nats: f64,
    pub boltzmann_scaled: f64,
}

impl EntropyValue {
    pub fn new(nats: f64, k: f64) -> Result<Self> {
        check_k(k)?;
        Ok(Self { nats, boltzmann_scaled: k * nats })
    }
}

fn check_k(k: f64) -> Result<()> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Parameter(format!("Boltzmann constant must be positive, got {k}")));
    }
    Ok(())
}

/// `t ln t` with `0 ln 0 = 0`; NaN for negative arguments.
pub fn xlogx(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else if t < 0.0 {
        f64::NAN
    } else {
        t * t.ln()
    }
}

/// Binary entropy `−p ln p − (1−p) ln(1−p)`.
pub fn binary_entropy(p: f64) -> f64 {
    -xlogx(p) - xlogx(1.0 - p)
}

pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    let s: f64 = -rho.spectrum().iter().map(|&l| xlogx(l)).sum::<f64>();
    s.max(0.0)
}

pub fn thermo_entropy(rho: &DensityOperator, k: f64) -> Result<f64> {
    Ok(EntropyValue::new(von_neumann_entropy(rho), k)?.boltzmann_scaled)
}

/// Entropy of the whole composite state.
pub fn joint_entropy(rho: &DensityOperator) -> f64 {
    von_neumann_entropy(rho)
}

/// Entropy of each single-factor marginal, in partition order.
pub fn marginal_entropies(rho: &DensityOperator, p: &Partition) -> Result<Vec<f64>> {
    p.check(rho.dim())?;
    if p.len() == 1 {
        return Ok(vec![von_neumann_entropy(rho)]);
    }
    (0..p.len()).map(|mu| partial_trace(rho, p, &[mu]).map(|r| von_neumann_entropy(&r))).collect()
}

/// Sum of the marginal entropies.
pub fn marginal_entropy(rho: &DensityOperator, p: &Partition) -> Result<f64> {
    Ok(marginal_entropies(rho, p)?.iter().sum())
}

/// Marginal minus joint entropy; round-off negatives down to `-CORR_CLAMP`
/// are reported as zero.
pub fn correlation_information(rho: &DensityOperator, p: &Partition) -> Result<f64> {
    let i = marginal_entropy(rho, p)? - joint_entropy(rho);
    Ok(clamp_correlation(i))
}

pub(crate) fn clamp_correlation(i: f64) -> f64 {
    if (-CORR_CLAMP..0.0).contains(&i) {
        0.0
    } else {
        i
    }
}

/// `D(σ‖ρ) = tr σ ln σ − tr σ ln ρ`, `+∞` when `supp σ ⊄ supp ρ`.
pub fn relative_entropy(sigma: &DensityOperator, rho: &DensityOperator) -> Result<f64> {
    if sigma.dim() != rho.dim() {
        return Err(Error::Dimension(format!(
            "relative entropy of {}- and {}-dimensional states",
            sigma.dim(),
            rho.dim()
        )));
    }
    let spec = BlockSpectrum::of(rho.matrix());
    let s = sigma.matrix();
    let mut cross = 0.0;
    for block in &spec.blocks {
        let b = block.idx.len();
        for (k, &mu) in block.values.iter().enumerate() {
            // ⟨w|σ|w⟩ restricted to the block's support
            let mut q = C64::new(0.0, 0.0);
            for a in 0..b {
                let wa = block.vectors[(a, k)].conj();
                for c in 0..b {
                    q += wa * s[(block.idx[a], block.idx[c])] * block.vectors[(c, k)];
                }
            }
            let q = q.re;
            if mu <= SUPP_TOL {
                if q > SUPP_TOL {
                    return Ok(f64::INFINITY);
                }
            } else if q != 0.0 {
                cross += q * mu.ln();
            }
        }
    }
    let self_term: f64 = sigma.spectrum().iter().map(|&l| xlogx(l)).sum();
    Ok(self_term - cross)
}
