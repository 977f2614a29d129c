//! Pass/fail bookkeeping shared by the identity checks.

use serde::Serialize;

/// One failed comparison, identified by the check name and its index tuple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub check: String,
    pub index: Vec<usize>,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
}

/// Outcome of comparing many computed quantities against their closed forms.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IdentityReport {
    pub checked: usize,
    pub max_rel_err: f64,
    pub violations: Vec<Violation>,
}

/// `|lhs - rhs|` relative to the larger magnitude of the two.
pub fn rel_err(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    }
}

impl IdentityReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Compares `lhs` to `rhs` at relative tolerance `tol`.
    pub fn record(&mut self, check: &str, index: &[usize], lhs: f64, rhs: f64, tol: f64) {
        let err = if lhs.is_finite() && rhs.is_finite() {
            rel_err(lhs, rhs)
        } else {
            f64::INFINITY
        };
        self.checked += 1;
        if err > self.max_rel_err || err.is_nan() {
            self.max_rel_err = err;
        }
        if !(err <= tol) {
            self.violations.push(Violation {
                check: check.to_string(),
                index: index.to_vec(),
                lhs,
                rhs,
                rel_err: err,
            });
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }

    pub fn merge(&mut self, other: IdentityReport) {
        self.checked += other.checked;
        self.max_rel_err = self.max_rel_err.max(other.max_rel_err);
        self.violations.extend(other.violations);
    }
}
