//! A measured inequality `lhs ≤ rhs`, the unit of every numerical check.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
}

impl Inequality {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Inequality { lhs, rhs }
    }

    /// `lhs − rhs`; positive means violated.
    pub fn excess(&self) -> f64 {
        self.lhs - self.rhs
    }

    /// `lhs ≤ rhs + slack`, false on NaN.
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.rhs + slack
    }

    /// `lhs ≤ factor·rhs + slack`.
    pub fn holds_scaled(&self, factor: f64, slack: f64) -> bool {
        self.lhs <= factor * self.rhs + slack
    }
}
