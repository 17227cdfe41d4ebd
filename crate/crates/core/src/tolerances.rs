//! Numerical tolerances shared across the crate.
//!
//! Every constant has a matching field on [`Tolerances`] so callers can
//! override it without touching the defaults.

use serde::{Deserialize, Serialize};

/// Membership slack for the simplex sum and ball radii.
pub const MEMBERSHIP: f64 = 1e-9;
/// Constraint residual for the ℓp-ball multiplier bisection.
pub const LP_BISECTION: f64 = 1e-10;
/// Stationarity residual required of a Bregman projection.
pub const BREGMAN_STATIONARITY: f64 = 1e-8;
/// Default certified objective gap for the oracle minimizer.
pub const ORACLE_GAP: f64 = 1e-12;
/// Additive slack for lemma inequalities.
pub const LEMMA_SLACK: f64 = 1e-6;
/// Slack for the relative-smoothness inequalities.
pub const INEQUALITY_SLACK: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub membership: f64,
    pub lp_bisection: f64,
    pub bregman_stationarity: f64,
    pub oracle_gap: f64,
    pub lemma_slack: f64,
    pub inequality_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            membership: MEMBERSHIP,
            lp_bisection: LP_BISECTION,
            bregman_stationarity: BREGMAN_STATIONARITY,
            oracle_gap: ORACLE_GAP,
            lemma_slack: LEMMA_SLACK,
            inequality_slack: INEQUALITY_SLACK,
        }
    }
}
