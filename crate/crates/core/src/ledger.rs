//! Residuals of the information-corrected thermodynamic laws along a
//! trajectory, flux series and the traditional-regime condition flags.
//!
//! Sign conventions: `ΔS` in the Landauer balance is the system-entropy
//! *decrease* `S(ρ_S) − S(ρ′_S)`; every other `Δ` is final minus initial.

use crate::entropy::{clamp_correlation, correlation_information, joint_entropy, marginal_entropy, von_neumann_entropy};
use crate::error::{Error, Result};
use crate::operator::{partial_trace, DensityOperator, HermitianOperator, Partition};
use crate::thermo::{free_energy, total_hamiltonian, Energies, ThermalReference, WorkLedger};
use crate::tol::{CONDITION_TOL, JOINT_DRIFT_MAX};

/// Joint state together with the Hamiltonian pieces in force at that time.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub rho: DensityOperator,
    pub partition: Partition,
    pub h_s: HermitianOperator,
    pub h_int: HermitianOperator,
}

impl Snapshot {
    pub fn new(rho: DensityOperator, partition: Partition, h_s: HermitianOperator, h_int: HermitianOperator) -> Result<Self> {
        check_bipartite(&partition, rho.dim())?;
        if h_s.dim() != partition.dims()[0] || h_int.dim() != rho.dim() {
            return Err(Error::Dimension(format!(
                "H_S ({}) and H_int ({}) do not fit partition {:?}",
                h_s.dim(),
                h_int.dim(),
                partition.dims()
            )));
        }
        Ok(Self { rho, partition, h_s, h_int })
    }

    /// Snapshot with `H_int = 0`.
    pub fn uncoupled(rho: DensityOperator, partition: Partition, h_s: HermitianOperator) -> Result<Self> {
        let d = rho.dim();
        Self::new(rho, partition, h_s, HermitianOperator::zeros(d))
    }
}

fn check_bipartite(p: &Partition, dim: usize) -> Result<()> {
    if p.len() != 2 {
        return Err(Error::Dimension(format!("expected a system–bath bipartition, got {:?}", p.dims())));
    }
    p.check(dim)
}

/// Everything the ledger needs from one system–bath state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateSummary {
    pub s_system: f64,
    pub s_bath: f64,
    pub s_joint: f64,
    pub i: f64,
    pub d_bath: f64,
    pub energies: Energies,
    pub f_system: f64,
    /// Population of the two highest bath levels.
    pub bath_edge_population: f64,
}

impl StateSummary {
    pub fn evaluate(
        rho: &DensityOperator,
        p: &Partition,
        h_s: &HermitianOperator,
        h_b: &HermitianOperator,
        h_int: &HermitianOperator,
        thermal: &ThermalReference,
    ) -> Result<Self> {
        let h_total = total_hamiltonian(h_s, h_b, h_int)?;
        Self::evaluate_with(rho, p, h_s, h_b, h_int, &h_total, thermal)
    }

    pub(crate) fn evaluate_with(
        rho: &DensityOperator,
        p: &Partition,
        h_s: &HermitianOperator,
        h_b: &HermitianOperator,
        h_int: &HermitianOperator,
        h_total: &HermitianOperator,
        thermal: &ThermalReference,
    ) -> Result<Self> {
        check_bipartite(p, rho.dim())?;
        let rho_s = partial_trace(rho, p, &[0])?;
        let rho_b = partial_trace(rho, p, &[1])?;
        let s_system = von_neumann_entropy(&rho_s);
        let s_bath = von_neumann_entropy(&rho_b);
        let s_joint = joint_entropy(rho);
        let energies = Energies {
            system: h_s.expectation(rho_s.matrix())?,
            bath: h_b.expectation(rho_b.matrix())?,
            interaction: h_int.expectation(rho.matrix())?,
            total: h_total.expectation(rho.matrix())?,
        };
        let db = rho_b.dim();
        let bath_edge_population = (db.saturating_sub(2)..db).map(|m| rho_b.matrix()[(m, m)].re).sum();
        Ok(Self {
            s_system,
            s_bath,
            s_joint,
            i: clamp_correlation(s_system + s_bath - s_joint),
            d_bath: thermal.relative_entropy(&rho_b)?,
            energies,
            f_system: free_energy(&rho_s, h_s, thermal.beta())?,
            bath_edge_population,
        })
    }
}

fn finite_d(d: f64) -> Result<f64> {
    if d.is_finite() {
        Ok(d)
    } else {
        Err(Error::NonComparable("relative entropy to the thermal reference is infinite".into()))
    }
}

/// `βΔQ − (ΔS + ΔI + ΔD)` between two summaries.
pub fn landauer_between(before: &StateSummary, after: &StateSummary, beta: f64) -> Result<f64> {
    let dq = after.energies.bath - before.energies.bath;
    let ds = before.s_system - after.s_system;
    let di = after.i - before.i;
    let dd = finite_d(after.d_bath)? - finite_d(before.d_bath)?;
    Ok(beta * dq - (ds + di + dd))
}

/// `(W − ΔF − ΔƐ_SB) − β⁻¹(ΔI + ΔD)` between two summaries.
pub fn second_law_between(before: &StateSummary, after: &StateSummary, beta: f64) -> Result<f64> {
    if beta == 0.0 {
        return Err(Error::Parameter("second-law balance needs nonzero β".into()));
    }
    let w = after.energies.total - before.energies.total;
    let df = after.f_system - before.f_system;
    let de = after.energies.interaction - before.energies.interaction;
    let di = after.i - before.i;
    let dd = finite_d(after.d_bath)? - finite_d(before.d_bath)?;
    Ok((w - df - de) - (di + dd) / beta)
}

/// `k[ΔS_ME − ΔI]` for a unitary step `ρ_i → ρ_f`.
pub fn entropy_increase_residual(rho_i: &DensityOperator, rho_f: &DensityOperator, p: &Partition, k: f64) -> Result<f64> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Parameter(format!("Boltzmann constant must be positive, got {k}")));
    }
    let drift = joint_entropy(rho_f) - joint_entropy(rho_i);
    if drift.abs() > JOINT_DRIFT_MAX {
        return Err(Error::NonUnitaryTrajectory { drift });
    }
    let ds_me = marginal_entropy(rho_f, p)? - marginal_entropy(rho_i, p)?;
    let di = correlation_information(rho_f, p)? - correlation_information(rho_i, p)?;
    Ok(k * (ds_me - di))
}

/// Landauer balance between two joint states under a fixed bath Hamiltonian.
pub fn landauer_residual(
    rho: &DensityOperator,
    rho_final: &DensityOperator,
    p: &Partition,
    h_b: &HermitianOperator,
    thermal: &ThermalReference,
) -> Result<f64> {
    check_bipartite(p, rho.dim())?;
    check_bipartite(p, rho_final.dim())?;
    let parts = |r: &DensityOperator| -> Result<(f64, f64, f64, f64)> {
        let rs = partial_trace(r, p, &[0])?;
        let rb = partial_trace(r, p, &[1])?;
        Ok((
            h_b.expectation(rb.matrix())?,
            von_neumann_entropy(&rs),
            correlation_information(r, p)?,
            finite_d(thermal.relative_entropy(&rb)?)?,
        ))
    };
    let (e0, s0, i0, d0) = parts(rho)?;
    let (e1, s1, i1, d1) = parts(rho_final)?;
    Ok(thermal.beta() * (e1 - e0) - ((s0 - s1) + (i1 - i0) + (d1 - d0)))
}

pub fn second_law_residual(
    before: &Snapshot,
    after: &Snapshot,
    h_b: &HermitianOperator,
    thermal: &ThermalReference,
) -> Result<f64> {
    if before.partition != after.partition {
        return Err(Error::Dimension("snapshots use different partitions".into()));
    }
    let s0 = StateSummary::evaluate(&before.rho, &before.partition, &before.h_s, h_b, &before.h_int, thermal)?;
    let s1 = StateSummary::evaluate(&after.rho, &after.partition, &after.h_s, h_b, &after.h_int, thermal)?;
    second_law_between(&s0, &s1, thermal.beta())
}

/// Which premises of the traditional inequalities hold for a state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConditionReport {
    pub product: bool,
    pub thermal_equilibrium: bool,
    pub weak_coupling: bool,
}

impl ConditionReport {
    /// `interaction_energy` is `tr[H_int ρ]`, `coupling_norm` is `‖H_int‖`.
    /// Zero coupling counts as weak.
    pub fn from_values(i: f64, d_bath: f64, interaction_energy: f64, coupling_norm: f64, weak_tol: f64) -> Self {
        Self {
            product: i < CONDITION_TOL,
            thermal_equilibrium: d_bath < CONDITION_TOL,
            weak_coupling: interaction_energy.abs() <= weak_tol * coupling_norm,
        }
    }
}

pub fn condition_report(snapshot: &Snapshot, thermal: &ThermalReference, weak_tol: f64) -> Result<ConditionReport> {
    let p = &snapshot.partition;
    let rho_b = partial_trace(&snapshot.rho, p, &[1])?;
    Ok(ConditionReport::from_values(
        correlation_information(&snapshot.rho, p)?,
        thermal.relative_entropy(&rho_b)?,
        snapshot.h_int.expectation(snapshot.rho.matrix())?,
        snapshot.h_int.norm(),
        weak_tol,
    ))
}

/// One time point of a trajectory. Cumulative quantities (`q`, `w`) and
/// residuals are measured from the first record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermoRecord {
    pub t: f64,
    pub s_system: f64,
    pub s_bath: f64,
    pub s_joint: f64,
    pub i: f64,
    pub d_bath: f64,
    pub q: f64,
    pub w: WorkLedger,
    pub f_system: f64,
    pub residual_landauer: f64,
    pub residual_second_law: f64,
    pub residual_entropy_increase: f64,
    pub conditions: ConditionReport,
    pub bath_edge_population: f64,
}

impl ThermoRecord {
    pub fn new(
        t: f64,
        initial: &StateSummary,
        now: &StateSummary,
        beta: f64,
        conditions: ConditionReport,
    ) -> Result<Self> {
        let ds_me = (now.s_system + now.s_bath) - (initial.s_system + initial.s_bath);
        Ok(Self {
            t,
            s_system: now.s_system,
            s_bath: now.s_bath,
            s_joint: now.s_joint,
            i: now.i,
            d_bath: now.d_bath,
            q: now.energies.bath - initial.energies.bath,
            w: WorkLedger::between(&initial.energies, &now.energies)?,
            f_system: now.f_system,
            residual_landauer: landauer_between(initial, now, beta)?,
            residual_second_law: second_law_between(initial, now, beta)?,
            residual_entropy_increase: ds_me - (now.i - initial.i),
            conditions,
            bath_edge_population: now.bath_edge_population,
        })
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    records: Vec<ThermoRecord>,
    config_hash: String,
    beta: f64,
}

impl Trajectory {
    pub fn new(records: Vec<ThermoRecord>, config_hash: impl Into<String>, beta: f64) -> Result<Self> {
        if records.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(Error::Invariant("record times must be strictly increasing".into()));
        }
        Ok(Self { records, config_hash: config_hash.into(), beta })
    }

    pub fn records(&self) -> &[ThermoRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    /// Inverse temperature of the thermal reference, matched at `t = 0`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `βQ − ΔS` at record `k`; non-negative in the product/thermal regime.
    pub fn traditional_landauer_gap(&self, k: usize) -> f64 {
        let (r0, r) = (&self.records[0], &self.records[k]);
        self.beta * r.q - (r0.s_system - r.s_system)
    }

    /// `W − ΔF` at record `k`.
    pub fn traditional_second_law_gap(&self, k: usize) -> f64 {
        let (r0, r) = (&self.records[0], &self.records[k]);
        r.w.total_work - (r.f_system - r0.f_system)
    }
}

/// Time derivatives of the Landauer balance at one record; `ds` is the rate
/// of system-entropy decrease.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluxPoint {
    pub t: f64,
    pub dq_beta: f64,
    pub ds: f64,
    pub di: f64,
    pub dd: f64,
}

impl FluxPoint {
    /// `βQ̇ − (Ṡ + İ + Ḋ)`
    pub fn residual(&self) -> f64 {
        self.dq_beta - (self.ds + self.di + self.dd)
    }
}

/// Second-order finite differences on a uniform grid: central inside,
/// three-point one-sided at the ends.
pub fn derivative(values: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 3 {
        return Err(Error::InsufficientData { needed: 3, got: n });
    }
    let f = values;
    let mut out = Vec::with_capacity(n);
    out.push((-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h));
    for k in 1..n - 1 {
        out.push((f[k + 1] - f[k - 1]) / (2.0 * h));
    }
    out.push((3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h));
    Ok(out)
}

fn uniform_step(records: &[ThermoRecord]) -> Result<f64> {
    let h = records[1].t - records[0].t;
    let span = records[records.len() - 1].t - records[0].t;
    for w in records.windows(2) {
        if ((w[1].t - w[0].t) - h).abs() > 1e-9 * span.max(h) {
            return Err(Error::Parameter(format!("time grid is not uniform near t = {}", w[0].t)));
        }
    }
    Ok(span / (records.len() - 1) as f64)
}

pub fn flux_series(traj: &Trajectory) -> Result<Vec<FluxPoint>> {
    let r = traj.records();
    if r.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: r.len() });
    }
    let h = uniform_step(r)?;
    let series = |f: &dyn Fn(&ThermoRecord) -> f64| derivative(&r.iter().map(f).collect::<Vec<_>>(), h);
    let beta = traj.beta();
    let dq = series(&|x| beta * x.q)?;
    let ds = series(&|x| -x.s_system)?;
    let di = series(&|x| x.i)?;
    let dd = series(&|x| x.d_bath)?;
    Ok((0..r.len()).map(|k| FluxPoint { t: r[k].t, dq_beta: dq[k], ds: ds[k], di: di[k], dd: dd[k] }).collect())
}

/// Grid-refinement study over trajectories whose grids are successively
/// halved (`2N − 1` points after `N`).
#[derive(Clone, Debug, PartialEq)]
pub struct FluxConvergence {
    pub steps: Vec<f64>,
    /// Largest flux-identity residual on each grid.
    pub identity_residual: Vec<f64>,
    /// Largest change of any flux component between consecutive grids, at
    /// shared time points.
    pub refinement_change: Vec<f64>,
    /// `log₂` of consecutive refinement-change ratios; tends to 2.
    pub observed_order: Vec<f64>,
}

pub fn flux_convergence(levels: &[Trajectory]) -> Result<FluxConvergence> {
    if levels.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: levels.len() });
    }
    let fluxes = levels.iter().map(flux_series).collect::<Result<Vec<_>>>()?;
    let mut steps = Vec::new();
    let mut identity_residual = Vec::new();
    for (traj, f) in levels.iter().zip(&fluxes) {
        steps.push(uniform_step(traj.records())?);
        identity_residual.push(f.iter().map(|p| p.residual().abs()).fold(0.0, f64::max));
    }
    let mut refinement_change = Vec::new();
    for pair in fluxes.windows(2) {
        let (coarse, fine) = (&pair[0], &pair[1]);
        if fine.len() != 2 * coarse.len() - 1 {
            return Err(Error::Parameter(format!(
                "grid of {} points is not a halving of {} points",
                fine.len(),
                coarse.len()
            )));
        }
        let mut change: f64 = 0.0;
        for (k, c) in coarse.iter().enumerate() {
            let f = &fine[2 * k];
            for (a, b) in [(c.dq_beta, f.dq_beta), (c.ds, f.ds), (c.di, f.di), (c.dd, f.dd)] {
                change = change.max((a - b).abs());
            }
        }
        refinement_change.push(change);
    }
    let observed_order = refinement_change.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(FluxConvergence { steps, identity_residual, refinement_change, observed_order })
}

/// Minimum correlation information along a trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationFloor {
    /// `min_t I(t) ≥ −CORR_CLAMP`
    pub holds: bool,
    pub min_i: f64,
    pub t_min: f64,
    pub initial_i: f64,
}

impl CorrelationFloor {
    /// Drop of the minimum below the initial value (zero if none).
    pub fn dip(&self) -> f64 {
        (self.initial_i - self.min_i).max(0.0)
    }
}

pub fn proposition1_check(traj: &Trajectory) -> CorrelationFloor {
    let r = traj.records();
    let (mut min_i, mut t_min) = (f64::INFINITY, f64::NAN);
    for rec in r {
        if rec.i < min_i {
            min_i = rec.i;
            t_min = rec.t;
        }
    }
    CorrelationFloor {
        holds: r.is_empty() || min_i >= -crate::tol::CORR_CLAMP,
        min_i,
        t_min,
        initial_i: r.first().map_or(f64::NAN, |x| x.i),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{evolve, propagator};
    use crate::random::{haar_unitary, random_density, random_hermitian, seeded};
    use crate::thermo::{gibbs_state, matched_thermal};
    use crate::tol::IDENTITY_TOL;
    use rand::Rng;

    fn bath_reference(rho: &DensityOperator, p: &Partition, h_b: &HermitianOperator) -> ThermalReference {
        let rb = partial_trace(rho, p, &[1]).unwrap();
        matched_thermal(h_b, h_b.expectation(rb.matrix()).unwrap()).unwrap()
    }

    #[test]
    fn entropy_increase_trivial_and_random() {
        let mut rng = seeded(1);
        let p = Partition::bipartite(2, 3).unwrap();
        let rho = random_density(&mut rng, 6, 4);
        assert_eq!(entropy_increase_residual(&rho, &rho, &p, 1.0).unwrap(), 0.0);
        for _ in 0..50 {
            let rho = random_density(&mut rng, 6, 3);
            let out = evolve(&rho, &haar_unitary(&mut rng, 6)).unwrap();
            assert!(entropy_increase_residual(&rho, &out, &p, 1.0).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn product_start_entropy_increase_is_final_correlation() {
        let mut rng = seeded(2);
        let p = Partition::bipartite(3, 2).unwrap();
        let rho = random_density(&mut rng, 3, 3).kron(&random_density(&mut rng, 2, 2));
        let out = evolve(&rho, &haar_unitary(&mut rng, 6)).unwrap();
        let ds_me = marginal_entropy(&out, &p).unwrap() - marginal_entropy(&rho, &p).unwrap();
        let i = correlation_information(&out, &p).unwrap();
        assert!((ds_me - i).abs() < 1e-10 && i >= 0.0);
    }

    #[test]
    fn non_unitary_step_rejected() {
        let p = Partition::bipartite(2, 2).unwrap();
        let pure = DensityOperator::basis(4, 0).unwrap();
        let mixed = DensityOperator::maximally_mixed(4);
        assert!(matches!(entropy_increase_residual(&pure, &mixed, &p, 1.0), Err(Error::NonUnitaryTrajectory { .. })));
    }

    #[test]
    fn landauer_identity_random() {
        let mut rng = seeded(3);
        let p = Partition::bipartite(2, 4).unwrap();
        for _ in 0..50 {
            let rho = random_density(&mut rng, 8, 8);
            let h_b = random_hermitian(&mut rng, 4, 1.0);
            let th = bath_reference(&rho, &p, &h_b);
            let out = evolve(&rho, &haar_unitary(&mut rng, 8)).unwrap();
            assert!(landauer_residual(&rho, &rho, &p, &h_b, &th).unwrap().abs() < 1e-14);
            assert!(landauer_residual(&rho, &out, &p, &h_b, &th).unwrap().abs() < IDENTITY_TOL);
        }
    }

    #[test]
    fn landauer_reduces_to_traditional_bound_for_thermal_product_start() {
        let mut rng = seeded(4);
        let p = Partition::bipartite(2, 3).unwrap();
        for _ in 0..30 {
            let h_b = random_hermitian(&mut rng, 3, 1.0);
            let beta = rng.random_range(0.2..3.0);
            let th = gibbs_state(&h_b, beta).unwrap();
            let rho = random_density(&mut rng, 2, 2).kron(th.state());
            let out = evolve(&rho, &haar_unitary(&mut rng, 6)).unwrap();
            let rs0 = partial_trace(&rho, &p, &[0]).unwrap();
            let rs1 = partial_trace(&out, &p, &[0]).unwrap();
            let rb1 = partial_trace(&out, &p, &[1]).unwrap();
            let dq = h_b.expectation(rb1.matrix()).unwrap() - th.energy();
            let gap = beta * dq - (von_neumann_entropy(&rs0) - von_neumann_entropy(&rs1));
            let expected = th.relative_entropy(&rb1).unwrap() + correlation_information(&out, &p).unwrap();
            assert!((gap - expected).abs() < 1e-9);
            assert!(gap >= -1e-9);
        }
    }

    #[test]
    fn second_law_identity_for_driven_qubit() {
        let mut rng = seeded(5);
        let p = Partition::bipartite(2, 4).unwrap();
        let h_b = random_hermitian(&mut rng, 4, 1.0);
        let rho0 = random_density(&mut rng, 8, 5);
        let th = bath_reference(&rho0, &p, &h_b);
        let mut rho = rho0.clone();
        let mut last = (HermitianOperator::zeros(2), HermitianOperator::zeros(8));
        for _ in 0..3 {
            let hs = random_hermitian(&mut rng, 2, 1.0);
            let hi = random_hermitian(&mut rng, 8, 0.4);
            let h = total_hamiltonian(&hs, &h_b, &hi).unwrap();
            rho = evolve(&rho, &propagator(&h, rng.random_range(0.1..2.0))).unwrap();
            last = (hs, hi);
        }
        let hs0 = random_hermitian(&mut rng, 2, 1.0);
        let before = Snapshot::uncoupled(rho0.clone(), p.clone(), hs0.clone()).unwrap();
        let after = Snapshot::new(rho.clone(), p.clone(), last.0, last.1).unwrap();
        assert!(second_law_residual(&before, &after, &h_b, &th).unwrap().abs() < IDENTITY_TOL);
        assert!(second_law_residual(&before, &before, &h_b, &th).unwrap().abs() < 1e-14);
    }

    #[test]
    fn conditions_for_thermal_product_and_hot_bath() {
        let mut rng = seeded(6);
        let p = Partition::bipartite(2, 3).unwrap();
        let h_b = random_hermitian(&mut rng, 3, 1.0);
        let th = gibbs_state(&h_b, 1.0).unwrap();
        let hs = random_hermitian(&mut rng, 2, 1.0);
        let rho = random_density(&mut rng, 2, 2).kron(th.state());
        let snap = Snapshot::uncoupled(rho, p.clone(), hs.clone()).unwrap();
        let all = ConditionReport { product: true, thermal_equilibrium: true, weak_coupling: true };
        assert_eq!(condition_report(&snap, &th, 1e-9).unwrap(), all);

        let hot = random_density(&mut rng, 2, 2).kron(gibbs_state(&h_b, 0.2).unwrap().state());
        let snap = Snapshot::uncoupled(hot, p, hs).unwrap();
        let c = condition_report(&snap, &th, 1e-9).unwrap();
        assert!(c.product && !c.thermal_equilibrium);
    }

    #[test]
    fn derivative_is_exact_on_quadratics() {
        let h = 0.1;
        let f: Vec<f64> = (0..7).map(|k| {
            let t = k as f64 * h;
            3.0 * t * t - t + 2.0
        }).collect();
        let d = derivative(&f, h).unwrap();
        for (k, v) in d.iter().enumerate() {
            assert!((v - (6.0 * k as f64 * h - 1.0)).abs() < 1e-12);
        }
        assert!(matches!(derivative(&f[..2], h), Err(Error::InsufficientData { needed: 3, got: 2 })));
    }

    fn record(t: f64, i: f64) -> ThermoRecord {
        ThermoRecord {
            t,
            s_system: 0.3,
            s_bath: 0.2,
            s_joint: 0.1,
            i,
            d_bath: 0.0,
            q: 0.0,
            w: WorkLedger::default(),
            f_system: 0.0,
            residual_landauer: 0.0,
            residual_second_law: 0.0,
            residual_entropy_increase: 0.0,
            conditions: ConditionReport::default(),
            bath_edge_population: 0.0,
        }
    }

    #[test]
    fn constant_trajectory_has_zero_flux() {
        let traj = Trajectory::new((0..5).map(|k| record(k as f64 * 0.5, 0.4)).collect(), "x", 1.0).unwrap();
        for p in flux_series(&traj).unwrap() {
            assert!([p.dq_beta, p.ds, p.di, p.dd].iter().all(|x| x.abs() < 1e-14));
        }
        let short = Trajectory::new(vec![record(0.0, 0.0), record(1.0, 0.0)], "x", 1.0).unwrap();
        assert!(matches!(flux_series(&short), Err(Error::InsufficientData { .. })));
        let uneven = Trajectory::new(vec![record(0.0, 0.0), record(1.0, 0.0), record(3.0, 0.0)], "x", 1.0).unwrap();
        assert!(flux_series(&uneven).is_err());
        assert!(Trajectory::new(vec![record(1.0, 0.0), record(1.0, 0.0)], "x", 1.0).is_err());
    }

    #[test]
    fn correlation_floor_reports_minimum() {
        let traj = Trajectory::new(vec![record(0.0, 0.5), record(1.0, 0.2), record(2.0, 0.7)], "x", 1.0).unwrap();
        let c = proposition1_check(&traj);
        assert!(c.holds);
        assert_eq!((c.min_i, c.t_min), (0.2, 1.0));
        assert!((c.dip() - 0.3).abs() < 1e-15);
        let bad = Trajectory::new(vec![record(0.0, 0.0), record(1.0, -1e-6)], "x", 1.0).unwrap();
        assert!(!proposition1_check(&bad).holds);
    }
}
