//! Numerical tolerances shared across the crate.

/// Per-entry absolute Hermiticity tolerance.
pub const HERM_TOL: f64 = 1e-12;
/// Allowed deviation of a density operator's trace from one.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues in `[-PSD_TOL, 0)` are clamped to zero.
pub const PSD_TOL: f64 = 1e-10;
/// Relative Frobenius reconstruction tolerance of a spectral decomposition.
pub const RECON_TOL: f64 = 1e-10;
/// Eigenvalues at or below this count as outside the support.
pub const SUPP_TOL: f64 = 1e-12;
/// Unitarity tolerance accepted by [`crate::evolve`].
pub const UNITARY_TOL: f64 = 1e-8;
/// Relative tolerance on Gibbs-state energy matching.
pub const ENERGY_TOL: f64 = 1e-9;
/// Correlation information in `[-CORR_CLAMP, 0)` is reported as zero.
pub const CORR_CLAMP: f64 = 1e-9;
/// Joint-entropy drift above which a trajectory is rejected as non-unitary.
pub const JOINT_DRIFT_MAX: f64 = 1e-6;
/// Residual bound for the exact information-thermodynamics identities.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Slack allowed on the traditional inequalities.
pub const INEQUALITY_SLACK: f64 = 1e-9;
/// Condition-report thresholds (product, thermal equilibrium, weak coupling).
pub const CONDITION_TOL: f64 = 1e-9;
/// Neglected thermal tail weight allowed for a truncated oscillator.
pub const THERMAL_TAIL_TOL: f64 = 1e-12;
/// Population allowed on the top Fock levels of a truncated bath.
pub const FOCK_EDGE_TOL: f64 = 1e-12;
