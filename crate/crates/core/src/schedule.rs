//! Theta sequences of OGM and OGM-G and the momentum coefficients of the
//! generic accelerated form
//!
//! ```text
//! y_{i+1} = x_i - (1/L) grad f(x_i)
//! x_{i+1} = y_{i+1} + beta_i (y_{i+1} - y_i) + gamma_i (y_{i+1} - x_i)
//! ```

use crate::error::{FomError, Result};
use crate::report::IdentityReport;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaVariant {
    /// Backward recursion from `theta_N = 1`, used by OGM-G.
    OgmgTilde,
    /// Forward recursion from `theta_0 = 1`, used by OGM.
    OgmHat,
}

impl ThetaVariant {
    pub fn name(self) -> &'static str {
        match self {
            ThetaVariant::OgmgTilde => "ogmg",
            ThetaVariant::OgmHat => "ogm",
        }
    }
}

/// `theta_0, ..., theta_N` for one variant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaSeq {
    variant: ThetaVariant,
    values: Vec<f64>,
}

fn step4(t: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
}

fn step8(t: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 8.0 * t * t).sqrt())
}

pub fn theta_sequence(variant: ThetaVariant, n: usize) -> Result<ThetaSeq> {
    if n == 0 {
        return Err(FomError::Parameter("N must be at least 1".into()));
    }
    let mut values = vec![1.0; n + 1];
    match variant {
        ThetaVariant::OgmgTilde => {
            for i in (1..n).rev() {
                values[i] = step4(values[i + 1]);
            }
            values[0] = step8(values[1]);
        }
        ThetaVariant::OgmHat => {
            for i in 0..n {
                values[i + 1] = if i + 1 < n { step4(values[i]) } else { step8(values[i]) };
            }
        }
    }
    Ok(ThetaSeq { variant, values })
}

impl ThetaSeq {
    pub fn variant(&self) -> ThetaVariant {
        self.variant
    }

    /// Number of iterations N.
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// `theta_0^2`; for the OGM-G sequence this is the reciprocal of the
    /// worst-case bound on `||grad f(x_N)||^2 / (L R)^2`.
    pub fn theta0_sq(&self) -> f64 {
        self.values[0] * self.values[0]
    }
}

/// Checks the squared forms of the recursion,
/// `theta_i^2 = theta_i + theta_{i+1}^2` (i >= 1) and `theta_0^2 = theta_0 + 2 theta_1^2`
/// for OGM-G, the mirrored rules for OGM, and, when both variants of the same
/// N are supplied, the mirror relation `hat_i = tilde_{N-i}`.
pub fn verify_theta_identities(seq: &ThetaSeq, mirror: Option<&ThetaSeq>, tol: f64) -> Result<IdentityReport> {
    let n = seq.n();
    let t = seq.values();
    let mut rep = IdentityReport::new();
    match seq.variant {
        ThetaVariant::OgmgTilde => {
            rep.record("theta_N = 1", &[n], t[n], 1.0, tol);
            rep.record("theta_0^2 = theta_0 + 2 theta_1^2", &[0], t[0] * t[0], t[0] + 2.0 * t[1] * t[1], tol);
            for i in 1..n {
                rep.record("theta_i^2 = theta_i + theta_{i+1}^2", &[i], t[i] * t[i], t[i] + t[i + 1] * t[i + 1], tol);
            }
        }
        ThetaVariant::OgmHat => {
            rep.record("theta_0 = 1", &[0], t[0], 1.0, tol);
            for i in 0..n - 1 {
                rep.record(
                    "theta_{i+1}^2 = theta_{i+1} + theta_i^2",
                    &[i + 1],
                    t[i + 1] * t[i + 1],
                    t[i + 1] + t[i] * t[i],
                    tol,
                );
            }
            rep.record(
                "theta_N^2 = theta_N + 2 theta_{N-1}^2",
                &[n],
                t[n] * t[n],
                t[n] + 2.0 * t[n - 1] * t[n - 1],
                tol,
            );
        }
    }
    if let Some(other) = mirror {
        if other.n() != n {
            return Err(FomError::Parameter(format!(
                "mirror sequence has N = {} but expected {n}",
                other.n()
            )));
        }
        if other.variant == seq.variant {
            return Err(FomError::Parameter("mirror sequence must be of the other variant".into()));
        }
        let (hat, tilde) = match seq.variant {
            ThetaVariant::OgmHat => (seq, other),
            ThetaVariant::OgmgTilde => (other, seq),
        };
        for i in 0..=n {
            rep.record("hat_i = tilde_{N-i}", &[i], hat.get(i), tilde.get(n - i), tol);
        }
    }
    Ok(rep)
}

/// Momentum coefficients `beta_0..beta_{N-1}` and `gamma_0..gamma_{N-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumCoeffs {
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl MomentumCoeffs {
    pub fn new(beta: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        if beta.len() != gamma.len() {
            return Err(FomError::Parameter(format!(
                "beta has {} entries but gamma has {}",
                beta.len(),
                gamma.len()
            )));
        }
        if beta.iter().chain(&gamma).any(|v| !v.is_finite()) {
            return Err(FomError::Parameter("momentum coefficients must be finite".into()));
        }
        Ok(Self { beta, gamma })
    }

    /// All-zero momentum, which reduces the accelerated form to GM.
    pub fn zeros(n: usize) -> Self {
        Self {
            beta: vec![0.0; n],
            gamma: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }
}

/// OGM-G: `beta_i = (t_i - 1)(2 t_{i+1} - 1) / (t_i (2 t_i - 1))`,
/// `gamma_i = (2 t_{i+1} - 1) / (2 t_i - 1)`.
/// OGM: `beta_i = (t_i - 1) / t_{i+1}`, `gamma_i = t_i / t_{i+1}`.
pub fn momentum_coefficients(variant: ThetaVariant, seq: &ThetaSeq) -> Result<MomentumCoeffs> {
    if seq.variant != variant {
        return Err(FomError::Parameter(format!(
            "requested {} coefficients from a {} sequence",
            variant.name(),
            seq.variant.name()
        )));
    }
    let t = seq.values();
    let n = seq.n();
    let (beta, gamma) = match variant {
        ThetaVariant::OgmgTilde => (
            (0..n)
                .map(|i| (t[i] - 1.0) * (2.0 * t[i + 1] - 1.0) / (t[i] * (2.0 * t[i] - 1.0)))
                .collect(),
            (0..n).map(|i| (2.0 * t[i + 1] - 1.0) / (2.0 * t[i] - 1.0)).collect(),
        ),
        ThetaVariant::OgmHat => (
            (0..n).map(|i| (t[i] - 1.0) / t[i + 1]).collect(),
            (0..n).map(|i| t[i] / t[i + 1]).collect(),
        ),
    };
    Ok(MomentumCoeffs { beta, gamma })
}

/// Nesterov's fast gradient method in the same form: `t_0 = 1`,
/// `t_{i+1} = (1 + sqrt(1 + 4 t_i^2)) / 2`, `beta_i = (t_i - 1) / t_{i+1}`,
/// `gamma_i = 0`.
pub fn fgm_coefficients(n: usize) -> Result<MomentumCoeffs> {
    if n == 0 {
        return Err(FomError::Parameter("N must be at least 1".into()));
    }
    let mut t = 1.0;
    let mut beta = Vec::with_capacity(n);
    for _ in 0..n {
        let next = step4(t);
        beta.push((t - 1.0) / next);
        t = next;
    }
    Ok(MomentumCoeffs {
        beta,
        gamma: vec![0.0; n],
    })
}
