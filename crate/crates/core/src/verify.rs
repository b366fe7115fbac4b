//! Randomized check of the three exact balances over driven system–bath
//! instances.

use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::ledger::{entropy_increase_residual, landauer_residual, second_law_residual, Snapshot};
use crate::operator::{HermitianOperator, Partition};
use crate::par::{map_indexed, Execution};
use crate::random::{random_density, random_hermitian, stream};
use crate::thermo::gibbs_state;
use crate::tol::IDENTITY_TOL;
use crate::trajectory::{Leg, Protocol};

pub const SYSTEM_DIMS: [usize; 3] = [2, 3, 4];
pub const BATH_DIMS: std::ops::RangeInclusive<usize> = 2..=8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InstanceKind {
    /// Correlated start with a perturbed-thermal bath marginal.
    Correlated,
    /// `ρ_S ⊗ ρ_th`; with `uncoupled_endpoints` the first and last legs have
    /// no interaction.
    ProductThermal { uncoupled_endpoints: bool },
}

/// Random piecewise-constant protocol. The bath marginal is a thermal state
/// at `β₀ ∈ [0.3, 3]`, possibly mixed with noise, so the matched inverse
/// temperature stays away from zero.
pub fn random_protocol(rng: &mut impl Rng, ds: usize, db: usize, kind: InstanceKind) -> Result<Protocol> {
    let d = ds * db;
    let h_b = random_hermitian(rng, db, 1.0);
    let thermal = gibbs_state(&h_b, rng.random_range(0.3..3.0))?;
    let rank = rng.random_range(1..=ds);
    let rho_s = random_density(rng, ds, rank);
    let initial = match kind {
        InstanceKind::Correlated => {
            let eps = rng.random_range(0.0..0.5);
            let noise = random_density(rng, db, db);
            let rho_b = thermal.state().mix(&noise, eps)?;
            let c = rng.random_range(0.0..0.5);
            let rank = rng.random_range(1..=d);
            rho_s.kron(&rho_b).mix(&random_density(rng, d, rank), c)?
        }
        InstanceKind::ProductThermal { .. } => rho_s.kron(thermal.state()),
    };
    let n_legs = match kind {
        InstanceKind::ProductThermal { uncoupled_endpoints: true } => 3,
        _ => rng.random_range(1..=3),
    };
    let mut legs = Vec::with_capacity(n_legs);
    for k in 0..n_legs {
        let uncoupled = matches!(kind, InstanceKind::ProductThermal { uncoupled_endpoints: true })
            && (k == 0 || k + 1 == n_legs);
        legs.push(Leg {
            h_s: random_hermitian(rng, ds, 1.0),
            h_int: if uncoupled { HermitianOperator::zeros(d) } else { random_hermitian(rng, d, 0.5) },
            duration: rng.random_range(0.2..2.0),
            steps: 1,
        });
    }
    Protocol::new(Partition::bipartite(ds, db)?, h_b, legs, initial)
}

/// Residuals of one instance, between its initial and final states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InstanceResiduals {
    pub entropy_increase: f64,
    pub landauer: f64,
    pub second_law: f64,
}

pub fn instance_residuals(protocol: &Protocol) -> Result<InstanceResiduals> {
    let p = &protocol.partition;
    let fin = protocol.final_state()?;
    let thermal = protocol.thermal_reference()?;
    let (first, last) = (&protocol.legs[0], &protocol.legs[protocol.legs.len() - 1]);
    let before = Snapshot::new(protocol.initial.clone(), p.clone(), first.h_s.clone(), first.h_int.clone())?;
    let after = Snapshot::new(fin.clone(), p.clone(), last.h_s.clone(), last.h_int.clone())?;
    Ok(InstanceResiduals {
        entropy_increase: entropy_increase_residual(&protocol.initial, &fin, p, 1.0)?,
        landauer: landauer_residual(&protocol.initial, &fin, p, &protocol.h_b, &thermal)?,
        second_law: second_law_residual(&before, &after, &protocol.h_b, &thermal)?,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct IdentityStats {
    pub checked: usize,
    pub failures: usize,
    pub max_abs_residual: f64,
}

impl IdentityStats {
    fn add(&mut self, r: Option<f64>) {
        self.checked += 1;
        match r {
            Some(r) if r.abs() < IDENTITY_TOL => self.max_abs_residual = self.max_abs_residual.max(r.abs()),
            Some(r) => {
                self.failures += 1;
                self.max_abs_residual = self.max_abs_residual.max(if r.is_nan() { f64::INFINITY } else { r.abs() });
            }
            None => self.failures += 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub instances: usize,
    pub tolerance: f64,
    pub passed: bool,
    pub errors: usize,
    pub entropy_increase: IdentityStats,
    pub landauer: IdentityStats,
    pub second_law: IdentityStats,
    /// First error message, if any instance failed to evaluate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_error: Option<String>,
}

impl VerifyReport {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }
}

/// Instance `k` draws from stream `k` of `seed`, so the report does not
/// depend on the execution mode.
pub fn verify(instances: usize, seed: u64, exec: Execution) -> VerifyReport {
    let results = map_indexed(exec, instances, |k| {
        let mut rng = stream(seed, k as u64);
        let ds = SYSTEM_DIMS[rng.random_range(0..SYSTEM_DIMS.len())];
        let db = rng.random_range(BATH_DIMS);
        let kind = if rng.random_bool(0.25) {
            InstanceKind::ProductThermal { uncoupled_endpoints: rng.random_bool(0.5) }
        } else {
            InstanceKind::Correlated
        };
        random_protocol(&mut rng, ds, db, kind).and_then(|p| instance_residuals(&p))
    });
    let mut report = VerifyReport {
        seed,
        instances,
        tolerance: IDENTITY_TOL,
        passed: true,
        errors: 0,
        entropy_increase: IdentityStats::default(),
        landauer: IdentityStats::default(),
        second_law: IdentityStats::default(),
        first_error: None,
    };
    for r in results {
        match r {
            Ok(r) => {
                report.entropy_increase.add(Some(r.entropy_increase));
                report.landauer.add(Some(r.landauer));
                report.second_law.add(Some(r.second_law));
            }
            Err(e) => {
                report.errors += 1;
                report.first_error.get_or_insert_with(|| e.to_string());
                for s in [&mut report.entropy_increase, &mut report.landauer, &mut report.second_law] {
                    s.add(None);
                }
            }
        }
    }
    report.passed = [&report.entropy_increase, &report.landauer, &report.second_law].iter().all(|s| s.failures == 0);
    report
}
