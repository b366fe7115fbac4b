//! TOML run configuration and user-supplied scenarios.
//!
//! Matrices are given as flattened row-major `re`/`im` lists with an
//! explicit `dim`; an omitted `im` means a real matrix.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::jc::JCParams;
use crate::operator::{ComplexMatrix, DensityOperator, HermitianOperator, Partition, C64};
use crate::thermo::gibbs_state;
use crate::tol::CONDITION_TOL;
use crate::trajectory::{Leg, Protocol};

/// SHA-256 (hex) of the value's TOML serialization.
pub fn config_hash<T: Serialize + std::fmt::Debug>(value: &T) -> String {
    let text = toml::to_string(value).unwrap_or_else(|_| format!("{value:?}"));
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub jc: JCParams,
    pub figures: FigureConfig,
    pub verify: VerifyConfig,
    pub scenario: Option<ScenarioSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            jc: JCParams::default(),
            figures: FigureConfig::default(),
            verify: VerifyConfig::default(),
            scenario: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FigureConfig {
    /// Panels for the time-series figures; the default panels when absent.
    pub xi: Option<Vec<f64>>,
    pub fig1_points: usize,
}

impl Default for FigureConfig {
    fn default() -> Self {
        Self { xi: None, fig1_points: 201 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub instances: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { instances: 1000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub dim: usize,
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub im: Vec<f64>,
}

impl MatrixSpec {
    fn matrix(&self, field: &str) -> Result<ComplexMatrix> {
        let n = self.dim * self.dim;
        if self.dim == 0 || self.re.len() != n || !(self.im.is_empty() || self.im.len() == n) {
            return Err(Error::Config(format!(
                "{field}: dim = {} needs {n} entries in re (and im if given), got {} and {}",
                self.dim,
                self.re.len(),
                self.im.len()
            )));
        }
        ComplexMatrix::from_parts(self.dim, self.dim, &self.re, &self.im).map_err(|e| Error::Config(format!("{field}: {e}")))
    }

    fn hermitian(&self, field: &str, dim: usize) -> Result<HermitianOperator> {
        if self.dim != dim {
            return Err(Error::Config(format!("{field}: expected dim = {dim}, got {}", self.dim)));
        }
        HermitianOperator::new(self.matrix(field)?).map_err(|e| Error::Config(format!("{field}: {e}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Matrix { dim: usize, re: Vec<f64>, #[serde(default)] im: Vec<f64> },
    /// Normalized on load.
    Pure { re: Vec<f64>, #[serde(default)] im: Vec<f64> },
    Basis { dim: usize, index: usize },
    Mixed { dim: usize },
    /// Gibbs state of the local Hamiltonian (first-leg `H_S` for the system).
    Thermal { beta: f64 },
}

impl StateSpec {
    fn build(&self, field: &str, dim: usize, h: Option<&HermitianOperator>) -> Result<DensityOperator> {
        let wrap = |e: Error| Error::Config(format!("{field}: {e}"));
        let check_dim = |d: usize| {
            if d == dim {
                Ok(())
            } else {
                Err(Error::Config(format!("{field}: expected dimension {dim}, got {d}")))
            }
        };
        match self {
            StateSpec::Matrix { dim: d, re, im } => {
                check_dim(*d)?;
                let m = MatrixSpec { dim: *d, re: re.clone(), im: im.clone() }.matrix(field)?;
                DensityOperator::new(m).map_err(wrap)
            }
            StateSpec::Pure { re, im } => {
                check_dim(re.len())?;
                if !(im.is_empty() || im.len() == re.len()) {
                    return Err(Error::Config(format!("{field}: im has {} entries, re has {}", im.len(), re.len())));
                }
                let psi: Vec<C64> =
                    re.iter().enumerate().map(|(k, &r)| C64::new(r, im.get(k).copied().unwrap_or(0.0))).collect();
                DensityOperator::pure(&psi).map_err(wrap)
            }
            StateSpec::Basis { dim: d, index } => {
                check_dim(*d)?;
                DensityOperator::basis(*d, *index).map_err(wrap)
            }
            StateSpec::Mixed { dim: d } => {
                check_dim(*d)?;
                Ok(DensityOperator::maximally_mixed(*d))
            }
            StateSpec::Thermal { beta } => match h {
                Some(h) => Ok(gibbs_state(h, *beta).map_err(wrap)?.state().clone()),
                None => Err(Error::Config(format!("{field}: thermal state needs a local Hamiltonian"))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Product { system: StateSpec, bath: StateSpec },
    Joint { state: StateSpec },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegSpec {
    pub duration: f64,
    pub steps: usize,
    pub h_s: MatrixSpec,
    /// Zero coupling when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_int: Option<MatrixSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    /// `[d_S, d_B]`
    pub dims: Vec<usize>,
    pub h_b: MatrixSpec,
    pub initial: InitialSpec,
    pub legs: Vec<LegSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weak_tol: Option<f64>,
}

impl ScenarioSpec {
    pub fn build(&self) -> Result<Protocol> {
        let [ds, db] = self.dims[..] else {
            return Err(Error::Config(format!("scenario.dims: expected [d_S, d_B], got {:?}", self.dims)));
        };
        if ds == 0 || db == 0 {
            return Err(Error::Config("scenario.dims: dimensions must be positive".into()));
        }
        let partition = Partition::bipartite(ds, db)?;
        let h_b = self.h_b.hermitian("scenario.h_b", db)?;
        if self.legs.is_empty() {
            return Err(Error::Config("scenario.legs: at least one leg is required".into()));
        }
        let mut legs = Vec::with_capacity(self.legs.len());
        for (k, leg) in self.legs.iter().enumerate() {
            let field = format!("scenario.legs[{k}]");
            if !(leg.duration > 0.0 && leg.duration.is_finite()) {
                return Err(Error::Config(format!("{field}.duration: must be positive, got {}", leg.duration)));
            }
            if leg.steps == 0 {
                return Err(Error::Config(format!("{field}.steps: must be at least 1")));
            }
            let h_int = match &leg.h_int {
                Some(m) => m.hermitian(&format!("{field}.h_int"), ds * db)?,
                None => HermitianOperator::zeros(ds * db),
            };
            legs.push(Leg { h_s: leg.h_s.hermitian(&format!("{field}.h_s"), ds)?, h_int, duration: leg.duration, steps: leg.steps });
        }
        let initial = match &self.initial {
            InitialSpec::Product { system, bath } => {
                let s = system.build("scenario.initial.system", ds, Some(&legs[0].h_s))?;
                let b = bath.build("scenario.initial.bath", db, Some(&h_b))?;
                s.kron(&b)
            }
            InitialSpec::Joint { state } => state.build("scenario.initial.state", ds * db, None)?,
        };
        let weak_tol = self.weak_tol.unwrap_or(CONDITION_TOL);
        if !(weak_tol >= 0.0) {
            return Err(Error::Config(format!("scenario.weak_tol: must be non-negative, got {weak_tol}")));
        }
        Ok(Protocol::new(partition, h_b, legs, initial).map_err(|e| Error::Config(format!("scenario: {e}")))?.with_weak_tol(weak_tol))
    }
}
