//! Correlation-aware thermodynamic bookkeeping for finite-dimensional
//! system–bath models, with a Jaynes–Cummings testbed.

pub mod config;
pub mod entropy;
pub mod error;
pub mod figures;
pub mod jc;
pub mod ledger;
pub mod operator;
pub mod output;
pub mod par;
pub mod random;
pub mod thermo;
pub mod tol;
pub mod trajectory;
pub mod verify;

pub use error::{Error, Result};
pub use par::Execution;
