//! Default tolerances and their override syntax.
//!
//! Overrides are written as `key=value` pairs separated by commas, e.g.
//! `exact=1e-8,psd=1e-9`. A bare number sets every tolerance at once. The
//! `FOMLAB_TOL` environment variable uses the same syntax.

use crate::error::{FomError, Result};
use serde::Serialize;

pub const ENV_VAR: &str = "FOMLAB_TOL";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Theta recursion identities, relative to theta squared.
    pub theta: f64,
    /// Recursive triangle entries vs. their closed form.
    pub closed_form: f64,
    /// Column tail-sum identities.
    pub tail_sum: f64,
    /// OGM / OGM-G mirror relations and recursive-form agreement.
    pub symmetry: f64,
    /// Linear equality constraints of the dual certificate.
    pub equality: f64,
    /// PSD factorization, relative to max(|S|, 1).
    pub psd: f64,
    /// Slack allowed in the diagonal dominance test.
    pub dominance: f64,
    /// Measured vs. expected gradient norm on worst-case instances.
    pub exact: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            theta: 1e-12,
            closed_form: 1e-11,
            tail_sum: 1e-10,
            symmetry: 1e-11,
            equality: 1e-12,
            psd: 1e-10,
            dominance: 1e-12,
            exact: 1e-9,
        }
    }
}

impl Tolerances {
    /// Applies an override string on top of `self`.
    pub fn with_overrides(mut self, spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec.is_empty() {
            return Ok(self);
        }
        if let Ok(all) = spec.parse::<f64>() {
            check_tol("*", all)?;
            return Ok(Self {
                theta: all,
                closed_form: all,
                tail_sum: all,
                symmetry: all,
                equality: all,
                psd: all,
                dominance: all,
                exact: all,
            });
        }
        for item in spec.split(',') {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| FomError::Parameter(format!("tolerance override `{item}` is not key=value")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| FomError::Parameter(format!("tolerance `{item}` has a non-numeric value")))?;
            check_tol(key, value)?;
            let slot = match key.trim() {
                "theta" => &mut self.theta,
                "closed_form" => &mut self.closed_form,
                "tail_sum" => &mut self.tail_sum,
                "symmetry" => &mut self.symmetry,
                "equality" => &mut self.equality,
                "psd" => &mut self.psd,
                "dominance" => &mut self.dominance,
                "exact" => &mut self.exact,
                other => return Err(FomError::Parameter(format!("unknown tolerance key `{other}`"))),
            };
            *slot = value;
        }
        Ok(self)
    }

    /// Defaults, overridden by `FOMLAB_TOL` when it is set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(ENV_VAR) {
            Ok(spec) => Self::default().with_overrides(&spec),
            Err(_) => Ok(Self::default()),
        }
    }
}

fn check_tol(key: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(FomError::Parameter(format!("tolerance `{key}` must be finite and nonnegative")))
    }
}
