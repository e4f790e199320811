//! Tolerances and error measures shared by the solver and the verifiers.

/// Default tolerance for solver-versus-formula comparisons.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Absolute tolerance for probability vectors summing to one.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// Grounded systems whose estimated 1-norm condition number exceeds this are
/// flagged as ill-conditioned. Results are still returned.
pub const CONDITION_WARNING: f64 = 1e12;

/// `|a - b| / max(1, |a|, |b|)`; stays meaningful near zero.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}
