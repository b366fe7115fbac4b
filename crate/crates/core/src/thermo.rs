//! Gibbs states, energy-matched inverse temperatures, heat, work and free
//! energy. Units: ħ = k = 1.

use crate::entropy::{von_neumann_entropy, xlogx};
use crate::error::{Error, Result};
use crate::operator::{partial_trace, BlockSpectrum, ComplexMatrix, DensityOperator, HermitianOperator, Partition};
use crate::tol::ENERGY_TOL;

const BISECTION_MAX_ITER: usize = 200;
const BRACKET_SCALE: f64 = 50.0;

/// `ρ_th = e^{−βH}/Z` together with the data needed to compare other
/// states against it.
#[derive(Clone, Debug)]
pub struct ThermalReference {
    beta: f64,
    hamiltonian: HermitianOperator,
    state: DensityOperator,
    ln_partition: f64,
    energy: f64,
    /// `ln ρ_th = −βH − ln Z`, exact because the state has full support.
    log_state: ComplexMatrix,
}

impl ThermalReference {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn state(&self) -> &DensityOperator {
        &self.state
    }

    pub fn dim(&self) -> usize {
        self.state.dim()
    }

    pub fn partition_function(&self) -> f64 {
        self.ln_partition.exp()
    }

    pub fn ln_partition_function(&self) -> f64 {
        self.ln_partition
    }

    /// `tr[ρ_th H]`
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Set when the matched temperature is negative (target energy above the
    /// infinite-temperature mean).
    pub fn negative_temperature(&self) -> bool {
        self.beta < 0.0
    }

    /// `D(ρ‖ρ_th)`. A state of smaller dimension is zero-padded into the
    /// leading block, i.e. treated as living on the lowest levels.
    pub fn relative_entropy(&self, rho: &DensityOperator) -> Result<f64> {
        let padded;
        let rho = if rho.dim() < self.dim() {
            padded = rho.embed(self.dim())?;
            &padded
        } else if rho.dim() > self.dim() {
            return Err(Error::Dimension(format!(
                "{}-dimensional state against a {}-dimensional thermal reference",
                rho.dim(),
                self.dim()
            )));
        } else {
            rho
        };
        let self_term: f64 = rho.spectrum().iter().map(|&l| xlogx(l)).sum();
        Ok(self_term - rho.matrix().trace_product(&self.log_state)?.re)
    }

    /// `D(ρ‖ρ_th) = −S(ρ) + β tr[ρH] + ln Z`; same padding rule.
    pub fn relative_entropy_closed_form(&self, rho: &DensityOperator) -> Result<f64> {
        let rho = if rho.dim() < self.dim() { rho.embed(self.dim())? } else { rho.clone() };
        let e = self.hamiltonian.expectation(rho.matrix())?;
        Ok(-von_neumann_entropy(&rho) + self.beta * e + self.ln_partition)
    }
}

pub fn gibbs_state(h: &HermitianOperator, beta: f64) -> Result<ThermalReference> {
    if !beta.is_finite() {
        return Err(Error::Parameter(format!("inverse temperature must be finite, got {beta}")));
    }
    let spec = BlockSpectrum::of(h.matrix());
    let vals: Vec<f64> = spec.values().collect();
    // shift keeps every Boltzmann factor ≤ 1
    let shift = if beta >= 0.0 {
        vals.iter().copied().fold(f64::INFINITY, f64::min)
    } else {
        vals.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    };
    let z_shifted: f64 = vals.iter().map(|&l| (-beta * (l - shift)).exp()).sum();
    let matrix = spec.apply(|l| (-beta * (l - shift)).exp() / z_shifted);
    let energy = vals.iter().map(|&l| l * (-beta * (l - shift)).exp() / z_shifted).sum();
    let ln_partition = -beta * shift + z_shifted.ln();
    let state = DensityOperator::new(matrix)?;
    let mut log_state = h.matrix().scale_real(-beta);
    for i in 0..log_state.rows() {
        log_state[(i, i)].re -= ln_partition;
    }
    Ok(ThermalReference { beta, hamiltonian: h.clone(), state, ln_partition, energy, log_state })
}

/// Gibbs energy relative to `reference`, evaluated with Boltzmann factors
/// shifted so they never overflow.
fn shifted_energy(vals: &[f64], beta: f64, reference: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for &l in vals {
        let w = (-beta * (l - reference)).exp();
        num += (l - reference) * w;
        den += w;
    }
    num / den
}

/// Inverse temperature whose Gibbs state has mean energy `energy`.
///
/// Bisection on the strictly decreasing Gibbs energy, starting from the
/// bracket `±50/‖H‖` and widening it until it contains the root. Runs to
/// floating-point resolution of β (at most 200 halvings).
pub fn match_beta(h: &HermitianOperator, energy: f64) -> Result<f64> {
    let vals = h.eigenvalues();
    let (lmin, lmax) = (vals[0], vals[vals.len() - 1]);
    if !(energy > lmin && energy < lmax) {
        return Err(Error::EnergyRange { energy, min: lmin, max: lmax });
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let scale = lmin.abs().max(lmax.abs());
    if (energy - mean).abs() <= 1e-15 * scale {
        return Ok(0.0);
    }
    let norm = scale.max(f64::MIN_POSITIVE);
    let positive = energy < mean;
    let reference = if positive { lmin } else { lmax };
    let target = energy - reference;
    // g(β) = E(β) − target, decreasing in β
    let g = |beta: f64| shifted_energy(&vals, beta, reference) - target;

    let mut width = BRACKET_SCALE / norm;
    let (mut lo, mut hi) = if positive { (0.0, width) } else { (-width, 0.0) };
    for _ in 0..2048 {
        let outer = if positive { g(hi) } else { g(lo) };
        let bracketed = if positive { outer <= 0.0 } else { outer >= 0.0 };
        if bracketed {
            break;
        }
        width *= 2.0;
        if positive {
            lo = hi;
            hi = width;
        } else {
            hi = lo;
            lo = -width;
        }
    }
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Gibbs state whose energy equals `energy`, checked to [`ENERGY_TOL`].
pub fn matched_thermal(h: &HermitianOperator, energy: f64) -> Result<ThermalReference> {
    let beta = match_beta(h, energy)?;
    let reference = gibbs_state(h, beta)?;
    let vals = h.eigenvalues();
    let scale = energy.abs().max(vals[vals.len() - 1] - vals[0]);
    let actual = h.expectation(reference.state().matrix())?;
    if (actual - energy).abs() > ENERGY_TOL * scale {
        return Err(Error::Invariant(format!("matched Gibbs energy {actual} differs from target {energy}")));
    }
    Ok(reference)
}

/// `ΔQ = tr[H_B ρ′_B] − tr[H_B ρ_B]`
pub fn heat(h_b: &HermitianOperator, rho_b: &DensityOperator, rho_b_final: &DensityOperator) -> Result<f64> {
    if h_b.dim() != rho_b.dim() || h_b.dim() != rho_b_final.dim() {
        return Err(Error::Dimension(format!(
            "heat with H_B of dimension {} and states of dimension {} / {}",
            h_b.dim(),
            rho_b.dim(),
            rho_b_final.dim()
        )));
    }
    Ok(h_b.expectation(rho_b_final.matrix())? - h_b.expectation(rho_b.matrix())?)
}

/// Non-equilibrium free energy `tr[ρH] − S(ρ)/β`.
pub fn free_energy(rho: &DensityOperator, h: &HermitianOperator, beta: f64) -> Result<f64> {
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::Parameter(format!("free energy needs finite nonzero β, got {beta}")));
    }
    if h.dim() != rho.dim() {
        return Err(Error::Dimension(format!("{}-dim Hamiltonian on {}-dim state", h.dim(), rho.dim())));
    }
    Ok(h.expectation(rho.matrix())? - von_neumann_entropy(rho) / beta)
}

/// Energy bookkeeping of one system–bath state under `H_S ⊗ I + I ⊗ H_B + H_int`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Energies {
    pub system: f64,
    pub bath: f64,
    pub interaction: f64,
    /// `tr[Hρ]` on the joint space, computed independently of the parts.
    pub total: f64,
}

impl Energies {
    pub fn of(
        rho: &DensityOperator,
        rho_s: &DensityOperator,
        rho_b: &DensityOperator,
        h_s: &HermitianOperator,
        h_b: &HermitianOperator,
        h_int: &HermitianOperator,
    ) -> Result<Self> {
        let h_total = total_hamiltonian(h_s, h_b, h_int)?;
        Ok(Self {
            system: h_s.expectation(rho_s.matrix())?,
            bath: h_b.expectation(rho_b.matrix())?,
            interaction: h_int.expectation(rho.matrix())?,
            total: h_total.expectation(rho.matrix())?,
        })
    }
}

/// `H_S ⊗ I + I ⊗ H_B + H_int`
pub fn total_hamiltonian(
    h_s: &HermitianOperator,
    h_b: &HermitianOperator,
    h_int: &HermitianOperator,
) -> Result<HermitianOperator> {
    let local = h_s.kron(&HermitianOperator::identity(h_b.dim())).add(&HermitianOperator::identity(h_s.dim()).kron(h_b))?;
    local.add(h_int)
}

/// First-law split of the work done on the joint system.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WorkLedger {
    pub total_work: f64,
    /// ΔE_S
    pub system_term: f64,
    /// ΔQ = ΔE_B
    pub heat: f64,
    /// ΔƐ_SB
    pub interaction_term: f64,
}

impl WorkLedger {
    pub fn between(before: &Energies, after: &Energies) -> Result<Self> {
        let ledger = Self {
            total_work: after.total - before.total,
            system_term: after.system - before.system,
            heat: after.bath - before.bath,
            interaction_term: after.interaction - before.interaction,
        };
        let scale = 1f64.max(before.total.abs()).max(after.total.abs());
        if ledger.first_law_gap().abs() > 1e-9 * scale {
            return Err(Error::Invariant(format!("first law violated by {:.3e}", ledger.first_law_gap())));
        }
        Ok(ledger)
    }

    /// `W − (ΔE_S + ΔQ + ΔƐ_SB)`
    pub fn first_law_gap(&self) -> f64 {
        self.total_work - (self.system_term + self.heat + self.interaction_term)
    }
}

#[allow(clippy::too_many_arguments)]
pub fn work_ledger(
    h_s: &HermitianOperator,
    h_s_final: &HermitianOperator,
    h_b: &HermitianOperator,
    h_int: &HermitianOperator,
    h_int_final: &HermitianOperator,
    rho_sb: &DensityOperator,
    rho_sb_final: &DensityOperator,
    p: &Partition,
) -> Result<WorkLedger> {
    if p.len() != 2 {
        return Err(Error::Dimension(format!("work ledger needs a bipartition, got {:?}", p.dims())));
    }
    p.check(rho_sb.dim())?;
    p.check(rho_sb_final.dim())?;
    let energies = |rho: &DensityOperator, h_s: &HermitianOperator, h_int: &HermitianOperator| {
        let rs = partial_trace(rho, p, &[0])?;
        let rb = partial_trace(rho, p, &[1])?;
        Energies::of(rho, &rs, &rb, h_s, h_b, h_int)
    };
    let before = energies(rho_sb, h_s, h_int)?;
    let after = energies(rho_sb_final, h_s_final, h_int_final)?;
    WorkLedger::between(&before, &after)
}

/// `ΔD = D(ρ′_B‖ρ_th) − D(ρ_B‖ρ_th)`; `+∞` if either term is infinite.
pub fn delta_d(rho_b: &DensityOperator, rho_b_final: &DensityOperator, thermal: &ThermalReference) -> Result<f64> {
    let d0 = thermal.relative_entropy(rho_b)?;
    let d1 = thermal.relative_entropy(rho_b_final)?;
    if d0.is_infinite() || d1.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(d1 - d0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::relative_entropy;
    use crate::operator::{evolve, ops, propagator};
    use crate::random::{haar_unitary, random_bounded_hamiltonian, random_density, random_hermitian, seeded};
    use rand::Rng;
    use std::f64::consts::LN_2;

    fn two_level() -> HermitianOperator {
        HermitianOperator::from_real_diag(&[0.0, 1.0])
    }

    #[test]
    fn infinite_temperature_is_maximally_mixed() {
        let h = random_hermitian(&mut seeded(1), 5, 1.0);
        let th = gibbs_state(&h, 0.0).unwrap();
        assert!((th.state().matrix() - DensityOperator::maximally_mixed(5).matrix()).frobenius_norm() < 1e-14);
        assert!((th.partition_function() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn two_level_gibbs_at_ln2() {
        let th = gibbs_state(&two_level(), LN_2).unwrap();
        let expected = DensityOperator::from_diag(&[2.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((th.state().matrix() - expected.matrix()).frobenius_norm() < 1e-15);
        assert!((th.partition_function() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn low_temperature_limit_is_ground_state() {
        let th = gibbs_state(&two_level(), 1e3).unwrap();
        assert!((th.state().matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        // no overflow even for absurd β
        let th = gibbs_state(&two_level(), -1e6).unwrap();
        assert!((th.state().matrix()[(1, 1)].re - 1.0).abs() < 1e-15);
        assert!(th.negative_temperature());
    }

    #[test]
    fn gibbs_reconstruction_and_energy() {
        let mut rng = seeded(4);
        for _ in 0..10 {
            let h = random_hermitian(&mut rng, 6, 1.0);
            let beta = rng.random_range(-3.0..3.0);
            let th = gibbs_state(&h, beta).unwrap();
            let direct = crate::operator::op_func(&h, |l| (-beta * l).exp()).unwrap();
            let z = direct.matrix().trace().re;
            let expected = direct.matrix().scale_real(1.0 / z);
            assert!((th.state().matrix() - &expected).frobenius_norm() < 1e-10);
            assert!((th.energy() - h.expectation(th.state().matrix()).unwrap()).abs() < 1e-12);
            assert!((th.ln_partition_function() - z.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn match_beta_reference_cases() {
        assert_eq!(match_beta(&two_level(), 0.5).unwrap(), 0.0);
        assert!((match_beta(&two_level(), 1.0 / 3.0).unwrap() - LN_2).abs() < 1e-12);
        assert!(matches!(match_beta(&two_level(), 1.0), Err(Error::EnergyRange { .. })));
        assert!(matches!(match_beta(&two_level(), -0.1), Err(Error::EnergyRange { .. })));
        // above the mean: negative temperature
        assert!((match_beta(&two_level(), 2.0 / 3.0).unwrap() + LN_2).abs() < 1e-12);
    }

    #[test]
    fn truncated_oscillator_matches_closed_form() {
        let omega = 0.5;
        let h = HermitianOperator::new(ops::number(60).scale_real(omega)).unwrap();
        let beta = match_beta(&h, 1.0).unwrap();
        let closed = (1.0 / omega) * (1.0 + omega / 1.0f64).ln();
        assert!((closed - 2.0 * 1.5f64.ln()).abs() < 1e-15);
        assert!((beta - closed).abs() < 1e-6, "{beta} vs {closed}");
        assert!((beta - 0.810930).abs() < 1e-6);
        // truncation error is far below tolerance: neglected tail e^{−βω·60}
        assert!((-closed * omega * 60.0).exp() < 1e-10);
    }

    #[test]
    fn heat_cases() {
        let h = two_level();
        let a = DensityOperator::from_diag(&[1.0, 0.0]).unwrap();
        let b = DensityOperator::maximally_mixed(2);
        assert_eq!(heat(&h, &a, &a).unwrap(), 0.0);
        assert!((heat(&h, &a, &b).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(heat(&h, &a, &DensityOperator::maximally_mixed(3)), Err(Error::Dimension(_))));

        let mut rng = seeded(9);
        let hb = random_hermitian(&mut rng, 4, 1.0);
        let r0 = random_density(&mut rng, 4, 4);
        let r1 = random_density(&mut rng, 4, 2);
        let mut by_loops = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                by_loops += (hb.matrix()[(i, j)] * (r1.matrix()[(j, i)] - r0.matrix()[(j, i)])).re;
            }
        }
        assert!((heat(&hb, &r0, &r1).unwrap() - by_loops).abs() < 1e-14);
    }

    #[test]
    fn free_energy_cases() {
        let h = HermitianOperator::from_real_diag(&[0.0, 1.3, 2.0]);
        let eig = DensityOperator::basis(3, 1).unwrap();
        assert!((free_energy(&eig, &h, 0.7).unwrap() - 1.3).abs() < 1e-15);
        let beta = 0.9;
        let th = gibbs_state(&h, beta).unwrap();
        let f = free_energy(th.state(), &h, beta).unwrap();
        assert!((f + th.partition_function().ln() / beta).abs() < 1e-13);
        let f = free_energy(&DensityOperator::maximally_mixed(2), &two_level(), 1.0).unwrap();
        assert!((f - (0.5 - LN_2)).abs() < 1e-15);
        assert!(matches!(free_energy(&eig, &h, 0.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn gibbs_minimizes_free_energy() {
        let mut rng = seeded(10);
        for _ in 0..50 {
            let d = rng.random_range(2..7);
            let h = random_hermitian(&mut rng, d, 1.0);
            let beta = rng.random_range(0.1..4.0);
            let f_eq = free_energy(gibbs_state(&h, beta).unwrap().state(), &h, beta).unwrap();
            let rank = rng.random_range(1..=d);
            let rho = random_density(&mut rng, d, rank);
            assert!(free_energy(&rho, &h, beta).unwrap() >= f_eq - 1e-9);
        }
    }

    #[test]
    fn work_ledger_cases() {
        let mut rng = seeded(11);
        let (ds, db) = (2, 3);
        let p = Partition::bipartite(ds, db).unwrap();
        let hs = random_hermitian(&mut rng, ds, 1.0);
        let hb = random_hermitian(&mut rng, db, 1.0);
        let hi = random_hermitian(&mut rng, ds * db, 0.3);
        let rho = random_density(&mut rng, ds * db, 3);

        let frozen = work_ledger(&hs, &hs, &hb, &hi, &hi, &rho, &rho, &p).unwrap();
        assert_eq!(frozen, WorkLedger::default());

        // evolution under the constant total Hamiltonian conserves energy
        let h = total_hamiltonian(&hs, &hb, &hi).unwrap();
        let out = evolve(&rho, &propagator(&h, 1.7)).unwrap();
        let w = work_ledger(&hs, &hs, &hb, &hi, &hi, &rho, &out, &p).unwrap();
        assert!(w.total_work.abs() < 1e-9);
        assert!((w.system_term + w.heat + w.interaction_term).abs() < 1e-9);
        assert!(w.system_term.abs() > 1e-6);

        // sudden quench with the state frozen
        let hs2 = random_hermitian(&mut rng, ds, 1.0);
        let w = work_ledger(&hs, &hs2, &hb, &hi, &hi, &rho, &rho, &p).unwrap();
        let rs = partial_trace(&rho, &p, &[0]).unwrap();
        let expected = hs2.sub(&hs).unwrap().expectation(rs.matrix()).unwrap();
        assert!((w.total_work - expected).abs() < 1e-13);
        assert!(w.first_law_gap().abs() < 1e-13);
    }

    #[test]
    fn delta_d_cases() {
        let mut rng = seeded(12);
        let h = random_hermitian(&mut rng, 4, 1.0);
        let rho = random_density(&mut rng, 4, 4);
        let th = matched_thermal(&h, h.expectation(rho.matrix()).unwrap()).unwrap();
        assert_eq!(delta_d(&rho, &rho, &th).unwrap(), 0.0);

        let later = random_density(&mut rng, 4, 2);
        let dd = delta_d(th.state(), &later, &th).unwrap();
        assert!(dd >= 0.0);
        assert!((dd - relative_entropy(&later, th.state()).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn cached_log_matches_generic_relative_entropy() {
        let mut rng = seeded(14);
        let h = random_hermitian(&mut rng, 5, 1.0);
        let th = gibbs_state(&h, 0.8).unwrap();
        for _ in 0..5 {
            let rho = random_density(&mut rng, 5, 3);
            let a = th.relative_entropy(&rho).unwrap();
            let b = relative_entropy(&rho, th.state()).unwrap();
            let c = th.relative_entropy_closed_form(&rho).unwrap();
            assert!((a - b).abs() < 1e-10 && (a - c).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_gap_equals_relative_entropy_at_matched_energy() {
        let mut rng = seeded(15);
        for _ in 0..200 {
            let d = rng.random_range(2..=16);
            let h = random_hermitian(&mut rng, d, 1.0);
            let rank = rng.random_range(1..=d);
            let rho = random_density(&mut rng, d, rank);
            let th = matched_thermal(&h, h.expectation(rho.matrix()).unwrap()).unwrap();
            let lhs = von_neumann_entropy(th.state()) - von_neumann_entropy(&rho);
            let rhs = relative_entropy(&rho, th.state()).unwrap();
            assert!((lhs - rhs).abs() < 1e-8, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn match_beta_inverts_gibbs_energy() {
        let mut rng = seeded(16);
        for _ in 0..300 {
            let d = rng.random_range(2..9);
            let h = random_bounded_hamiltonian(&mut rng, d);
            let beta = rng.random_range(-5.0..5.0);
            let e = gibbs_state(&h, beta).unwrap().energy();
            let back = match_beta(&h, e).unwrap();
            assert!((back - beta).abs() < 1e-8, "β={beta} recovered {back} (d={d})");
        }
    }

    #[test]
    fn haar_evolution_of_bath_keeps_heat_finite() {
        let mut rng = seeded(18);
        let h = random_hermitian(&mut rng, 3, 1.0);
        let rho = random_density(&mut rng, 3, 3);
        let out = evolve(&rho, &haar_unitary(&mut rng, 3)).unwrap();
        assert!(heat(&h, &rho, &out).unwrap().is_finite());
    }
}
