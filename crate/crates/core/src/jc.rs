//! Qubit coupled to a single truncated bosonic mode under the rotating-wave
//! approximation, started in `ξ|0,n⟩ + ζ|1,n−1⟩`.
//!
//! Joint basis index is `μ·d_fock + m` (qubit first). `|0⟩` is the qubit
//! ground state and `σ₊ = |1⟩⟨0|`.

use serde::{Deserialize, Serialize};

use crate::config::config_hash;
use crate::entropy::binary_entropy;
use crate::error::{Error, Result};
use crate::ledger::Trajectory;
use crate::operator::ops::{annihilation, creation, number, sigma_minus, sigma_plus};
use crate::operator::{
    partial_trace, ComplexMatrix, DensityOperator, HermitianOperator, Partition, Propagator, C64,
};
use crate::par::Execution;
use crate::thermo::{gibbs_state, match_beta, total_hamiltonian, ThermalReference};
use crate::tol::{FOCK_EDGE_TOL, THERMAL_TAIL_TOL};
use crate::trajectory::{run, Leg, Protocol};

/// Largest oscillator truncation the thermal reference may grow to.
const MAX_REFERENCE_DIM: usize = 100_000;
/// Allowed gap between the closed-form and bisection inverse temperatures.
const BETA_CROSSCHECK_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JCParams {
    pub omega0: f64,
    pub omega: f64,
    pub g: f64,
    pub n: usize,
    /// Real part of ξ.
    pub xi: f64,
    pub xi_im: f64,
    /// Fock truncation; `n + 30` when absent.
    pub d_fock: Option<usize>,
    pub t_max: f64,
    /// Number of grid points on `[0, t_max]`, endpoints included.
    pub steps: usize,
}

impl Default for JCParams {
    fn default() -> Self {
        Self { omega0: 1.0, omega: 0.5, g: 1.0, n: 7, xi: 0.5, xi_im: 0.0, d_fock: None, t_max: 30.0, steps: 2000 }
    }
}

impl JCParams {
    pub fn with_xi(&self, xi: f64) -> Self {
        Self { xi, xi_im: 0.0, ..self.clone() }
    }

    pub fn xi(&self) -> C64 {
        C64::new(self.xi, self.xi_im)
    }

    /// `ζ = √(1 − |ξ|²)`, real and non-negative.
    pub fn zeta(&self) -> f64 {
        (1.0 - self.xi().norm_sqr()).max(0.0).sqrt()
    }

    /// `Δ = ω₀ − ω`
    pub fn detuning(&self) -> f64 {
        self.omega0 - self.omega
    }

    pub fn fock_dim(&self) -> usize {
        self.d_fock.unwrap_or(self.n + 30)
    }

    pub fn time_step(&self) -> f64 {
        self.t_max / (self.steps - 1) as f64
    }

    /// Same run with the grid step halved (`2N − 1` points).
    pub fn refined(&self) -> Self {
        Self { steps: 2 * self.steps - 1, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        for (name, v) in [("omega0", self.omega0), ("omega", self.omega)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !self.g.is_finite() {
            return bad(format!("g must be finite, got {}", self.g));
        }
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        let x = self.xi().norm_sqr();
        if !(x <= 1.0 + 1e-12) {
            return bad(format!("|xi| must not exceed 1, got {}", x.sqrt()));
        }
        if self.fock_dim() < self.n + 2 {
            return bad(format!("d_fock must be at least n + 2 = {}, got {}", self.n + 2, self.fock_dim()));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return bad(format!("t_max must be positive, got {}", self.t_max));
        }
        if self.steps < 3 {
            return bad(format!("steps must be at least 3, got {}", self.steps));
        }
        Ok(())
    }

    /// `Ω(m) = √(Δ² + 4g²m)`
    pub fn rabi(&self, m: usize) -> f64 {
        (self.detuning().powi(2) + 4.0 * self.g * self.g * m as f64).sqrt()
    }

    /// Eigenvalue `c_m(t)` of `c(n̂, t)`.
    pub fn c(&self, m: usize, t: f64) -> C64 {
        let (delta, om) = (self.detuning(), self.rabi(m));
        let phase = C64::from_polar(1.0, delta * t / 2.0);
        let ratio = if om == 0.0 { 0.0 } else { delta / om };
        phase * C64::new((om * t / 2.0).cos(), -ratio * (om * t / 2.0).sin())
    }

    /// Eigenvalue `d_m(t)` of `d(n̂, t)`.
    pub fn d(&self, m: usize, t: f64) -> C64 {
        let om = self.rabi(m);
        if om == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let phase = C64::from_polar(1.0, self.detuning() * t / 2.0);
        phase * C64::new(0.0, -2.0 * self.g / om * (om * t / 2.0).sin())
    }

    /// Correlation information of the initial state, `2h(|ξ|²)`.
    pub fn initial_correlation(&self) -> f64 {
        2.0 * binary_entropy(self.xi().norm_sqr())
    }
}

#[derive(Clone, Debug)]
pub struct JCHamiltonians {
    pub h_s: HermitianOperator,
    pub h_b: HermitianOperator,
    pub h_int: HermitianOperator,
    pub h_total: HermitianOperator,
}

pub fn build_hamiltonians(p: &JCParams) -> Result<JCHamiltonians> {
    p.validate()?;
    let d = p.fock_dim();
    let h_s = HermitianOperator::from_real_diag(&[0.0, p.omega0]);
    let h_b = HermitianOperator::new(number(d).scale_real(p.omega))?;
    let coupling = &sigma_plus().kron(&annihilation(d)) + &sigma_minus().kron(&creation(d));
    let h_int = HermitianOperator::new(coupling.scale_real(p.g))?;
    let h_total = total_hamiltonian(&h_s, &h_b, &h_int)?;
    Ok(JCHamiltonians { h_s, h_b, h_int, h_total })
}

pub fn initial_state(p: &JCParams) -> Result<DensityOperator> {
    p.validate()?;
    let d = p.fock_dim();
    let mut psi = vec![C64::new(0.0, 0.0); 2 * d];
    psi[p.n] = p.xi();
    psi[d + p.n - 1] = C64::new(p.zeta(), 0.0);
    DensityOperator::pure(&psi)
}

/// Interaction-picture propagator `e^{iH₀t}e^{−iHt}` assembled block by block
/// from `c_m(t)`, `d_m(t)` on the pairs `(|1,m−1⟩, |0,m⟩)`.
pub fn analytic_propagator(p: &JCParams, t: f64) -> Result<ComplexMatrix> {
    p.validate()?;
    let d = p.fock_dim();
    let mut u = ComplexMatrix::zeros(2 * d, 2 * d);
    u[(0, 0)] = C64::new(1.0, 0.0);
    // |1, d−1⟩ has no partner inside the truncation
    u[(2 * d - 1, 2 * d - 1)] = C64::new(1.0, 0.0);
    for m in 1..d {
        let (e, g) = (d + m - 1, m);
        let (c, dm, s) = (p.c(m, t), p.d(m, t), (m as f64).sqrt());
        u[(e, e)] = c;
        u[(e, g)] = dm * s;
        u[(g, e)] = -dm.conj() * s;
        u[(g, g)] = c.conj();
    }
    Ok(u)
}

#[derive(Clone, Debug)]
pub struct ReducedStates {
    pub rho_s: DensityOperator,
    pub rho_b: DensityOperator,
}

/// Reduced states built verbatim from the closed-form matrix elements.
/// Kept as raw matrices: they need not be valid states.
#[derive(Clone, Debug)]
pub struct ClosedFormStates {
    pub rho_s: ComplexMatrix,
    /// On the full truncated Fock space, nonzero on levels `n−2 … n+1`.
    pub rho_b: ComplexMatrix,
}

pub fn analytic_reduced_states(p: &JCParams, t: f64) -> Result<ClosedFormStates> {
    p.validate()?;
    let n = p.n;
    let (xi, zeta) = (p.xi(), C64::new(p.zeta(), 0.0));
    let (x2, z2) = (xi.norm_sqr(), zeta.norm_sqr());
    let (c_lo, d_lo, c_hi, d_hi) = (p.c(n - 1, t), p.d(n - 1, t), p.c(n + 1, t), p.d(n + 1, t));
    let nf = n as f64;
    let a1 = (nf - 1.0) * z2 * d_lo.norm_sqr();
    let a2 = z2 * c_lo.norm_sqr();
    let a3 = (nf - 1.0).sqrt() * xi.conj() * zeta * c_hi.conj() * d_lo;
    let b1 = x2 * c_hi.norm_sqr();
    let b2 = (nf + 1.0) * x2 * d_hi.norm_sqr();
    let b3 = -(nf + 1.0).sqrt() * xi.conj() * zeta * c_lo.conj() * d_hi;

    let rho_s = ComplexMatrix::from_real_diag(&[a1 + b1, a2 + b2]);
    let mut rho_b = ComplexMatrix::zeros(p.fock_dim(), p.fock_dim());
    let o = n - 2;
    rho_b[(o, o)] = C64::new(a1, 0.0);
    rho_b[(o + 1, o + 1)] = C64::new(a2, 0.0);
    rho_b[(o + 2, o + 2)] = C64::new(b1, 0.0);
    rho_b[(o + 3, o + 3)] = C64::new(b2, 0.0);
    rho_b[(o, o + 2)] = a3;
    rho_b[(o + 2, o)] = a3.conj();
    rho_b[(o + 1, o + 3)] = b3;
    rho_b[(o + 3, o + 1)] = b3.conj();
    Ok(ClosedFormStates { rho_s, rho_b })
}

/// Hamiltonians, partition and cached propagator of one configuration.
#[derive(Clone, Debug)]
pub struct JCModel {
    params: JCParams,
    hamiltonians: JCHamiltonians,
    partition: Partition,
    propagator: Propagator,
    initial: DensityOperator,
}

impl JCModel {
    pub fn new(params: &JCParams) -> Result<Self> {
        let hamiltonians = build_hamiltonians(params)?;
        let propagator = Propagator::new(&hamiltonians.h_total);
        Ok(Self {
            params: params.clone(),
            partition: Partition::bipartite(2, params.fock_dim())?,
            propagator,
            initial: initial_state(params)?,
            hamiltonians,
        })
    }

    pub fn params(&self) -> &JCParams {
        &self.params
    }

    pub fn hamiltonians(&self) -> &JCHamiltonians {
        &self.hamiltonians
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn initial_state(&self) -> &DensityOperator {
        &self.initial
    }

    /// `e^{iH₀t}e^{−iHt}` from the numerical spectral decomposition of `H`.
    pub fn oracle_propagator(&self, t: f64) -> ComplexMatrix {
        let u = self.propagator.at(t);
        let d = self.params.fock_dim();
        let (w0, w) = (self.params.omega0, self.params.omega);
        ComplexMatrix::from_fn(2 * d, 2 * d, |i, j| {
            let e0 = (i / d) as f64 * w0 + (i % d) as f64 * w;
            C64::from_polar(1.0, e0 * t) * u[(i, j)]
        })
    }

    /// Interaction-picture joint state at `t`.
    pub fn oracle_state(&self, t: f64) -> Result<DensityOperator> {
        let u = self.oracle_propagator(t);
        let left = u.matmul(self.initial.matrix())?;
        DensityOperator::new(left.matmul(&u.adjoint())?)
    }

    pub fn oracle_reduced_states(&self, t: f64) -> Result<ReducedStates> {
        let rho = self.oracle_state(t)?;
        let rho_b = partial_trace(&rho, &self.partition, &[1])?;
        certify_fock_edge(&rho_b, t)?;
        Ok(ReducedStates { rho_s: partial_trace(&rho, &self.partition, &[0])?, rho_b })
    }

    /// `⟨σ₊σ₋ ⊗ I + I ⊗ b†b⟩`
    pub fn excitation_number(&self, rho: &DensityOperator) -> f64 {
        let d = self.params.fock_dim();
        (0..2 * d).map(|i| ((i / d) + (i % d)) as f64 * rho.matrix()[(i, i)].re).sum()
    }
}

fn certify_fock_edge(rho_b: &DensityOperator, t: f64) -> Result<()> {
    let d = rho_b.dim();
    for m in d.saturating_sub(2)..d {
        let pop = rho_b.matrix()[(m, m)].re;
        if pop > FOCK_EDGE_TOL {
            return Err(Error::Truncation(format!(
                "population {pop:.3e} at Fock level {m} (t = {t}) exceeds {FOCK_EDGE_TOL:e}; increase d_fock"
            )));
        }
    }
    Ok(())
}

pub fn oracle_reduced_states(p: &JCParams, t: f64) -> Result<ReducedStates> {
    JCModel::new(p)?.oracle_reduced_states(t)
}

/// `β = (1/ω) ln(1 + ω/E)` for an untruncated oscillator of mean energy `E`.
pub fn closed_form_beta(omega: f64, energy: f64) -> f64 {
    (1.0 + omega / energy).ln() / omega
}

/// Thermal reference of the bath oscillator, on a Fock space large enough
/// that the neglected thermal tail `e^{−βωd}` is below [`THERMAL_TAIL_TOL`].
#[derive(Clone, Debug)]
pub struct BathReference {
    pub thermal: ThermalReference,
    pub beta_closed_form: f64,
    pub beta_matched: f64,
    pub energy: f64,
}

impl BathReference {
    pub fn dim(&self) -> usize {
        self.thermal.dim()
    }

    /// `Z = 1/(1 − e^{−βω})` of the untruncated oscillator.
    pub fn geometric_partition_function(&self, omega: f64) -> f64 {
        1.0 / (1.0 - (-self.beta_closed_form * omega).exp())
    }
}

pub fn bath_thermal_reference(p: &JCParams, rho_b: &DensityOperator) -> Result<BathReference> {
    p.validate()?;
    if rho_b.dim() != p.fock_dim() {
        return Err(Error::Dimension(format!("bath state of dimension {} for d_fock = {}", rho_b.dim(), p.fock_dim())));
    }
    certify_fock_edge(rho_b, f64::NAN)?;
    let omega = p.omega;
    let energy: f64 = (0..rho_b.dim()).map(|m| omega * m as f64 * rho_b.matrix()[(m, m)].re).sum();
    if !(energy > 0.0) {
        return Err(Error::EnergyRange { energy, min: 0.0, max: f64::INFINITY });
    }
    let beta = closed_form_beta(omega, energy);
    let needed = (THERMAL_TAIL_TOL.recip().ln() / (beta * omega)).floor() + 1.0;
    if !(needed <= MAX_REFERENCE_DIM as f64) {
        return Err(Error::Truncation(format!(
            "thermal reference at β = {beta:.6} needs {needed} Fock levels (limit {MAX_REFERENCE_DIM})"
        )));
    }
    let dim = p.fock_dim().max(needed as usize);
    let h_ref = HermitianOperator::new(number(dim).scale_real(omega))?;
    let beta_matched = match_beta(&h_ref, energy)?;
    if (beta_matched - beta).abs() > BETA_CROSSCHECK_TOL {
        return Err(Error::Truncation(format!(
            "closed-form β = {beta} and matched β = {beta_matched} disagree on {dim} Fock levels"
        )));
    }
    Ok(BathReference { thermal: gibbs_state(&h_ref, beta)?, beta_closed_form: beta, beta_matched, energy })
}

#[derive(Clone, Debug)]
pub struct JCRun {
    pub trajectory: Trajectory,
    pub reference: BathReference,
}

impl JCRun {
    /// Largest `|⟨N⟩(t) − ⟨N⟩(0)|`, read off the energy ledger.
    pub fn excitation_drift(&self, p: &JCParams) -> f64 {
        self.trajectory
            .records()
            .iter()
            .map(|r| (r.w.system_term / p.omega0 + r.q / p.omega).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_joint_entropy(&self) -> f64 {
        self.trajectory.records().iter().map(|r| r.s_joint).fold(0.0, f64::max)
    }

    pub fn max_edge_population(&self) -> f64 {
        self.trajectory.records().iter().map(|r| r.bath_edge_population).fold(0.0, f64::max)
    }
}

/// Full trajectory on the `steps`-point grid over `[0, t_max]`.
pub fn simulate(p: &JCParams, exec: Execution) -> Result<JCRun> {
    let model = JCModel::new(p)?;
    let h = model.hamiltonians();
    let rho_b = partial_trace(model.initial_state(), model.partition(), &[1])?;
    let reference = bath_thermal_reference(p, &rho_b)?;
    let leg = Leg { h_s: h.h_s.clone(), h_int: h.h_int.clone(), duration: p.t_max, steps: p.steps - 1 };
    let protocol = Protocol::new(model.partition().clone(), h.h_b.clone(), vec![leg], model.initial_state().clone())?
        .with_thermal(reference.thermal.clone())?;
    let trajectory = run(&protocol, &config_hash(p), exec)?;
    for r in trajectory.records() {
        if r.bath_edge_population > FOCK_EDGE_TOL {
            return Err(Error::Truncation(format!(
                "population {:.3e} on the top two Fock levels at t = {} exceeds {FOCK_EDGE_TOL:e}; increase d_fock",
                r.bath_edge_population, r.t
            )));
        }
    }
    Ok(JCRun { trajectory, reference })
}

/// Largest disagreement between the closed-form reduced states and
/// the oracle over a set of times.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormDiscrepancy {
    pub max_trace_distance_system: f64,
    pub max_trace_distance_bath: f64,
    pub t_at_max: f64,
    /// Largest `|tr ρ − 1|` of the closed-form states.
    pub max_trace_defect: f64,
}

fn trace_norm_half(m: &ComplexMatrix) -> Result<f64> {
    let spec = crate::operator::hermitian_eig_matrix(&m.hermitian_part())?;
    Ok(0.5 * spec.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
}

pub fn closed_form_discrepancy(p: &JCParams, times: &[f64]) -> Result<ClosedFormDiscrepancy> {
    let model = JCModel::new(p)?;
    let mut out = ClosedFormDiscrepancy {
        max_trace_distance_system: 0.0,
        max_trace_distance_bath: 0.0,
        t_at_max: f64::NAN,
        max_trace_defect: 0.0,
    };
    for &t in times {
        let exact = model.oracle_reduced_states(t)?;
        let closed = analytic_reduced_states(p, t)?;
        let ds = trace_norm_half(&(&closed.rho_s - exact.rho_s.matrix()))?;
        let db = trace_norm_half(&(&closed.rho_b - exact.rho_b.matrix()))?;
        if ds.max(db) > out.max_trace_distance_system.max(out.max_trace_distance_bath) || out.t_at_max.is_nan() {
            out.t_at_max = t;
        }
        out.max_trace_distance_system = out.max_trace_distance_system.max(ds);
        out.max_trace_distance_bath = out.max_trace_distance_bath.max(db);
        for m in [&closed.rho_s, &closed.rho_b] {
            out.max_trace_defect = out.max_trace_defect.max((m.trace().re - 1.0).abs());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{correlation_information, relative_entropy, von_neumann_entropy};
    use crate::operator::unitarity_deviation;
    use crate::random::seeded;
    use rand::Rng;

    fn small() -> JCParams {
        JCParams { d_fock: Some(12), steps: 200, t_max: 6.0, ..JCParams::default() }
    }

    #[test]
    fn default_parameters() {
        let p = JCParams::default();
        assert_eq!((p.omega0, p.omega, p.g, p.n), (1.0, 0.5, 1.0, 7));
        assert_eq!((p.fock_dim(), p.t_max, p.steps), (37, 30.0, 2000));
    }

    #[test]
    fn invalid_params_rejected() {
        let p = JCParams::default();
        assert!(JCParams { n: 1, ..p.clone() }.validate().is_err());
        assert!(JCParams { xi: 1.2, ..p.clone() }.validate().is_err());
        assert!(JCParams { d_fock: Some(8), ..p.clone() }.validate().is_err());
        assert!(JCParams { omega: 0.0, ..p.clone() }.validate().is_err());
        assert!(JCParams { steps: 2, ..p }.validate().is_err());
    }

    #[test]
    fn hamiltonian_matrix_elements() {
        let p = small();
        let d = p.fock_dim();
        let h = build_hamiltonians(&p).unwrap();
        let n = p.n;
        let elem = h.h_int.matrix()[(d + n - 1, n)];
        assert!((elem.re - p.g * (n as f64).sqrt()).abs() < 1e-14 && elem.im == 0.0);

        let free = build_hamiltonians(&JCParams { g: 0.0, ..p.clone() }).unwrap();
        let m = free.h_total.matrix();
        for i in 0..2 * d {
            for j in 0..2 * d {
                if i != j {
                    assert_eq!(m[(i, j)], C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn excitation_block_gap() {
        let p = JCParams::default();
        let omega = p.rabi(7);
        assert!((omega - 28.25f64.sqrt()).abs() < 1e-15);
        assert!((omega - 5.31507).abs() < 1e-5);
        let h = build_hamiltonians(&p).unwrap();
        let d = p.fock_dim();
        let idx = [d + 6, 7];
        let block = HermitianOperator::new(h.h_total.matrix().principal_submatrix(&idx)).unwrap();
        let ev = block.eigenvalues();
        assert!((ev[1] - ev[0] - omega).abs() < 1e-12);
    }

    #[test]
    fn initial_state_correlation() {
        for (xi, expected) in [(1.0, 0.0), (std::f64::consts::FRAC_1_SQRT_2, 2.0 * std::f64::consts::LN_2), (0.5, 1.124670)] {
            let p = JCParams { xi, ..small() };
            let rho = initial_state(&p).unwrap();
            let i = correlation_information(&rho, &Partition::bipartite(2, p.fock_dim()).unwrap()).unwrap();
            assert!((i - expected).abs() < 1e-6, "ξ={xi}: {i}");
            assert!((i - p.initial_correlation()).abs() < 1e-12);
            assert!(rho.purity() > 1.0 - 1e-14);
        }
    }

    #[test]
    fn propagator_coefficients() {
        let p = small();
        let u0 = analytic_propagator(&p, 0.0).unwrap();
        assert!((&u0 - &ComplexMatrix::identity(2 * p.fock_dim())).frobenius_norm() < 1e-15);
        let mut rng = seeded(1);
        for _ in 0..50 {
            let t = rng.random_range(0.0..30.0);
            for m in 0..20 {
                let om = p.rabi(m);
                let lhs = p.c(m, t).norm_sqr() + 4.0 * p.g * p.g * m as f64 / (om * om) * (om * t / 2.0).sin().powi(2);
                assert!((lhs - 1.0).abs() < 1e-13);
            }
        }
        let res = JCParams { omega0: 0.5, ..p.clone() };
        for m in 1..6 {
            let t = 0.83;
            let s = m as f64;
            let root = s.sqrt();
            assert!((res.c(m, t) - C64::new((p.g * root * t).cos(), 0.0)).norm() < 1e-14);
            let block = res.d(m, t) * root;
            assert!((block - C64::new(0.0, -(p.g * root * t).sin())).norm() < 1e-14);
        }
    }

    #[test]
    fn analytic_propagator_matches_oracle() {
        let p = small();
        let model = JCModel::new(&p).unwrap();
        let mut rng = seeded(2);
        for _ in 0..100 {
            let t = rng.random_range(0.0..p.t_max);
            let a = analytic_propagator(&p, t).unwrap();
            assert!(unitarity_deviation(&a) < 1e-12);
            let o = model.oracle_propagator(t);
            assert!((&a - &o).max_abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn oracle_invariants() {
        let p = small();
        let model = JCModel::new(&p).unwrap();
        let n0 = model.excitation_number(model.initial_state());
        assert!((n0 - (p.n as f64)).abs() < 1e-14);
        for k in 0..40 {
            let t = k as f64 * 0.37;
            let rho = model.oracle_state(t).unwrap();
            assert!((model.excitation_number(&rho) - n0).abs() < 1e-10);
            let r = model.oracle_reduced_states(t).unwrap();
            assert!((r.rho_s.purity() - r.rho_b.purity()).abs() < 1e-12);
            assert!(von_neumann_entropy(&rho) < 1e-9);
        }
        let r0 = model.oracle_reduced_states(0.0).unwrap();
        let x2 = p.xi().norm_sqr();
        assert!((r0.rho_s.matrix()[(0, 0)].re - x2).abs() < 1e-15);
        assert!((r0.rho_b.matrix()[(p.n, p.n)].re - x2).abs() < 1e-15);
    }

    #[test]
    fn truncation_error_names_level() {
        let p = JCParams { d_fock: Some(9), ..small() };
        let rho_b = DensityOperator::basis(9, 8).unwrap();
        match bath_thermal_reference(&p, &rho_b) {
            Err(Error::Truncation(msg)) => assert!(msg.contains("Fock level 8")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn closed_form_states_at_time_zero() {
        let p = small();
        let a = analytic_reduced_states(&p, 0.0).unwrap();
        let o = oracle_reduced_states(&p, 0.0).unwrap();
        assert!((&a.rho_s - o.rho_s.matrix()).frobenius_norm() < 1e-15);
        assert!((&a.rho_b - o.rho_b.matrix()).frobenius_norm() < 1e-15);
        let rep = closed_form_discrepancy(&p, &[0.0]).unwrap();
        assert!(rep.max_trace_distance_bath < 1e-15 && rep.max_trace_defect < 1e-15);
    }

    #[test]
    fn closed_form_beta_reference() {
        let b = closed_form_beta(0.5, 1.0);
        assert!((b - (2.0 * 3f64.ln() - 2.0 * 2f64.ln())).abs() < 1e-15);
        assert!((b - 0.810930).abs() < 1e-6);
        assert!(closed_form_beta(0.5, 1e-8) > 30.0);
    }

    #[test]
    fn bath_reference_certified_and_cross_checked() {
        let p = JCParams::default();
        let model = JCModel::new(&p).unwrap();
        let rho_b = partial_trace(model.initial_state(), model.partition(), &[1]).unwrap();
        let r = bath_thermal_reference(&p, &rho_b).unwrap();
        assert!((r.beta_closed_form - r.beta_matched).abs() < 1e-6);
        assert!((-r.beta_closed_form * p.omega * r.dim() as f64).exp() < 1e-12);
        assert!(r.dim() > p.fock_dim());
        let z = r.thermal.partition_function();
        assert!((z - r.geometric_partition_function(p.omega)).abs() < 1e-10 * z);

        // full-matrix relative entropy vs the diagonal-reference closed form
        let padded = rho_b.embed(r.dim()).unwrap();
        let full = relative_entropy(&padded, r.thermal.state()).unwrap();
        let n_mean: f64 = (0..rho_b.dim()).map(|m| m as f64 * rho_b.matrix()[(m, m)].re).sum();
        let closed = -von_neumann_entropy(&rho_b) + r.beta_closed_form * p.omega * n_mean + z.ln();
        assert!((full - closed).abs() < 1e-8);
    }

    #[test]
    fn vacuum_limit_of_reference() {
        let p = small();
        let mut diag = vec![0.0; p.fock_dim()];
        diag[0] = 1.0 - 1e-6;
        diag[1] = 1e-6;
        let r = bath_thermal_reference(&p, &DensityOperator::from_diag(&diag).unwrap()).unwrap();
        assert!(r.thermal.state().matrix()[(0, 0)].re > 1.0 - 1e-5);
        let vac = DensityOperator::basis(p.fock_dim(), 0).unwrap();
        assert!(matches!(bath_thermal_reference(&p, &vac), Err(Error::EnergyRange { .. })));
    }

    #[test]
    fn product_start_keeps_correlation_non_negative() {
        for xi in [0.0, 1.0] {
            let p = JCParams { xi, ..small() };
            let run = simulate(&p, Execution::Sequential).unwrap();
            let recs = run.trajectory.records();
            assert!(recs[0].i.abs() < 1e-12);
            assert!(recs.iter().all(|r| r.i >= -1e-9));
        }
    }

    #[test]
    fn simulate_matches_oracle_entropies() {
        let p = small();
        let run = simulate(&p, Execution::Parallel).unwrap();
        let model = JCModel::new(&p).unwrap();
        for rec in run.trajectory.records().iter().step_by(37) {
            let r = model.oracle_reduced_states(rec.t).unwrap();
            assert!((rec.s_system - von_neumann_entropy(&r.rho_s)).abs() < 1e-9);
            assert!((rec.d_bath - run.reference.thermal.relative_entropy(&r.rho_b).unwrap()).abs() < 1e-9);
        }
        assert!(run.excitation_drift(&p) < 1e-10);
        assert!(run.max_joint_entropy() < 1e-9);
    }
}
