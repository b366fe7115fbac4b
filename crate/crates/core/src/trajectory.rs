//! Exact unitary evolution of a system–bath state under piecewise-constant
//! driving, recorded as a [`Trajectory`].
//!
//! During leg `k` the Hamiltonian is `H_S^k ⊗ I + I ⊗ H_B + H_int^k`; a record
//! at a leg boundary belongs to the leg that ends there. Records inside one
//! leg depend only on the state at the start of the leg, so they are
//! evaluated independently (in parallel under [`Execution::Parallel`]).

use crate::error::{Error, Result};
use crate::ledger::{ConditionReport, StateSummary, ThermoRecord, Trajectory};
use crate::operator::{evolve, partial_trace, propagator, DensityOperator, HermitianOperator, Partition, Propagator};
use crate::par::{try_map_indexed, Execution};
use crate::thermo::{matched_thermal, total_hamiltonian, ThermalReference};
use crate::tol::{CONDITION_TOL, JOINT_DRIFT_MAX};

/// One constant-Hamiltonian segment, sampled at `steps` equally spaced times
/// after its start.
#[derive(Clone, Debug)]
pub struct Leg {
    pub h_s: HermitianOperator,
    pub h_int: HermitianOperator,
    pub duration: f64,
    pub steps: usize,
}

#[derive(Clone, Debug)]
pub struct Protocol {
    pub partition: Partition,
    pub h_b: HermitianOperator,
    pub legs: Vec<Leg>,
    pub initial: DensityOperator,
    /// Reference for `D(ρ_B‖ρ_th)`; matched to the initial bath energy when absent.
    pub thermal: Option<ThermalReference>,
    pub weak_tol: f64,
}

impl Protocol {
    pub fn new(partition: Partition, h_b: HermitianOperator, legs: Vec<Leg>, initial: DensityOperator) -> Result<Self> {
        let protocol = Self { partition, h_b, legs, initial, thermal: None, weak_tol: CONDITION_TOL };
        protocol.validate()?;
        Ok(protocol)
    }

    pub fn with_thermal(mut self, thermal: ThermalReference) -> Result<Self> {
        if thermal.dim() < self.h_b.dim() {
            return Err(Error::Dimension(format!(
                "thermal reference of dimension {} is smaller than the bath ({})",
                thermal.dim(),
                self.h_b.dim()
            )));
        }
        self.thermal = Some(thermal);
        Ok(self)
    }

    pub fn with_weak_tol(mut self, weak_tol: f64) -> Self {
        self.weak_tol = weak_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.partition;
        if p.len() != 2 {
            return Err(Error::Dimension(format!("expected a system–bath bipartition, got {:?}", p.dims())));
        }
        p.check(self.initial.dim())?;
        let (ds, db) = (p.dims()[0], p.dims()[1]);
        if self.h_b.dim() != db {
            return Err(Error::Dimension(format!("H_B has dimension {} but the bath has {db}", self.h_b.dim())));
        }
        if self.legs.is_empty() {
            return Err(Error::Parameter("protocol needs at least one leg".into()));
        }
        for (k, leg) in self.legs.iter().enumerate() {
            if leg.h_s.dim() != ds || leg.h_int.dim() != ds * db {
                return Err(Error::Dimension(format!("leg {k}: Hamiltonian dimensions do not match {:?}", p.dims())));
            }
            if !(leg.duration > 0.0 && leg.duration.is_finite()) || leg.steps == 0 {
                return Err(Error::Parameter(format!("leg {k}: need positive duration and at least one step")));
            }
        }
        Ok(())
    }

    pub fn thermal_reference(&self) -> Result<ThermalReference> {
        if let Some(th) = &self.thermal {
            return Ok(th.clone());
        }
        let rho_b = partial_trace(&self.initial, &self.partition, &[1])?;
        matched_thermal(&self.h_b, self.h_b.expectation(rho_b.matrix())?)
    }

    pub fn total_duration(&self) -> f64 {
        self.legs.iter().map(|l| l.duration).sum()
    }

    /// Final state by direct conjugation with each leg's full propagator.
    pub fn final_state(&self) -> Result<DensityOperator> {
        let mut rho = self.initial.clone();
        for leg in &self.legs {
            let h = total_hamiltonian(&leg.h_s, &self.h_b, &leg.h_int)?;
            rho = evolve(&rho, &propagator(&h, leg.duration))?;
        }
        Ok(rho)
    }
}

pub fn run(protocol: &Protocol, config_hash: &str, exec: Execution) -> Result<Trajectory> {
    protocol.validate()?;
    let thermal = protocol.thermal_reference()?;
    let beta = thermal.beta();
    let p = &protocol.partition;
    let h_b = &protocol.h_b;
    let totals = protocol
        .legs
        .iter()
        .map(|l| total_hamiltonian(&l.h_s, h_b, &l.h_int))
        .collect::<Result<Vec<_>>>()?;
    let norms: Vec<f64> = protocol.legs.iter().map(|l| l.h_int.norm()).collect();
    let weak_tol = protocol.weak_tol;

    let first = &protocol.legs[0];
    let initial = StateSummary::evaluate_with(&protocol.initial, p, &first.h_s, h_b, &first.h_int, &totals[0], &thermal)?;
    let conditions = |s: &StateSummary, norm: f64| {
        ConditionReport::from_values(s.i, s.d_bath, s.energies.interaction, norm, weak_tol)
    };
    let mut records = vec![ThermoRecord::new(0.0, &initial, &initial, beta, conditions(&initial, norms[0]))?];

    let mut rho = protocol.initial.clone();
    let mut t_start = 0.0;
    for (k, leg) in protocol.legs.iter().enumerate() {
        let prop = Propagator::new(&totals[k]);
        let tilde = prop.to_eigenbasis(rho.matrix())?;
        let dt = leg.duration / leg.steps as f64;
        let out = try_map_indexed(exec, leg.steps, |j| -> Result<(ThermoRecord, Option<DensityOperator>)> {
            let last = j + 1 == leg.steps;
            let tau = if last { leg.duration } else { (j + 1) as f64 * dt };
            let state = prop.state_at(&tilde, tau)?;
            let now = StateSummary::evaluate_with(&state, p, &leg.h_s, h_b, &leg.h_int, &totals[k], &thermal)?;
            let drift = now.s_joint - initial.s_joint;
            if drift.abs() > JOINT_DRIFT_MAX {
                return Err(Error::NonUnitaryTrajectory { drift });
            }
            let rec = ThermoRecord::new(t_start + tau, &initial, &now, beta, conditions(&now, norms[k]))?;
            Ok((rec, last.then_some(state)))
        })?;
        for (rec, state) in out {
            records.push(rec);
            if let Some(s) = state {
                rho = s;
            }
        }
        t_start += leg.duration;
    }
    Trajectory::new(records, config_hash, beta)
}
