//! Tolerance ledger shared by every module.

/// Weight normalization slack for lotteries.
pub const WEIGHT: f64 = 1e-12;

/// Slack for geometric identities and for declaring a property satisfied.
pub const GEOM: f64 = 1e-9;

/// Strict-improvement margin required before a violation is declared.
pub const STRICT: f64 = 1e-6;

/// Relative target for certified optimality gaps: `gap <= OPT_GAP * (1 + value)`.
pub const OPT_GAP: f64 = 1e-6;

/// Absolute slack scaled by the magnitude of the compared quantities.
pub fn scaled(tol: f64, magnitude: f64) -> f64 {
    tol * (1.0 + magnitude.abs())
}
