//! Runs first-order methods against a [`SmoothOracle`] and records traces.
//!
//! Two routes are provided: [`run_fsfom`] applies a step-coefficient triangle
//! literally, keeping every past gradient, while [`run_method`] uses the
//! two-sequence momentum forms that need only the previous `y`.

use crate::error::{FomError, Result};
use crate::oracle::{check_dim, SmoothOracle, Vector};
use crate::schedule::{fgm_coefficients, momentum_coefficients, theta_sequence, MomentumCoeffs, ThetaVariant};
use crate::stepmatrix::StepSchedule;
use serde::{Deserialize, Serialize};

/// Iterates `x_0..x_N`, the gradient steps `y_0..y_N` (`y_0 = x_0`), and the
/// gradient and value at every `x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub xs: Vec<Vector>,
    pub ys: Vec<Vector>,
    pub grads: Vec<Vector>,
    pub fvals: Vec<f64>,
}

impl Trace {
    fn start(oracle: &SmoothOracle, x0: &Vector) -> Result<Self> {
        check_dim(oracle, x0)?;
        let mut t = Trace {
            xs: Vec::new(),
            ys: vec![x0.clone()],
            grads: Vec::new(),
            fvals: Vec::new(),
        };
        t.push_point(oracle, x0.clone(), 0)?;
        Ok(t)
    }

    fn push_point(&mut self, oracle: &SmoothOracle, x: Vector, iteration: usize) -> Result<()> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(FomError::NumericalFailure {
                iteration,
                what: "iterate".into(),
            });
        }
        let f = oracle.value(&x);
        let g = oracle.gradient(&x);
        if !f.is_finite() {
            return Err(FomError::NumericalFailure {
                iteration,
                what: "function value".into(),
            });
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(FomError::NumericalFailure {
                iteration,
                what: "gradient".into(),
            });
        }
        self.xs.push(x);
        self.grads.push(g);
        self.fvals.push(f);
        Ok(())
    }

    /// Number of iterations recorded (`xs.len() - 1`).
    pub fn n(&self) -> usize {
        self.xs.len() - 1
    }

    pub fn last_x(&self) -> &Vector {
        self.xs.last().expect("trace always holds x_0")
    }

    pub fn last_grad(&self) -> &Vector {
        self.grads.last().expect("trace always holds x_0")
    }

    /// Largest `||a_i - b_i|| / max(||b_i||, 1)` over the iterates of two traces.
    pub fn max_iterate_deviation(&self, other: &Trace) -> f64 {
        self.xs
            .iter()
            .zip(&other.xs)
            .map(|(a, b)| (a - b).norm() / b.norm().max(1.0))
            .fold(0.0, f64::max)
    }
}

/// `x_{i+1} = x_i - (1/L) sum_k h[i+1][k] grad f(x_k)`.
pub fn run_fsfom(oracle: &SmoothOracle, x0: &Vector, schedule: &StepSchedule) -> Result<Trace> {
    let n = schedule.n();
    if n == 0 {
        return Err(FomError::Parameter("schedule must have N >= 1".into()));
    }
    let inv_l = 1.0 / oracle.lipschitz();
    let mut trace = Trace::start(oracle, x0)?;
    for i in 0..n {
        let x_i = &trace.xs[i];
        trace.ys.push(x_i - &trace.grads[i] * inv_l);
        let mut next = x_i.clone();
        for (k, &h) in schedule.row(i + 1).iter().enumerate() {
            if h != 0.0 {
                next.axpy(-h * inv_l, &trace.grads[k], 1.0);
            }
        }
        trace.push_point(oracle, next, i + 1)?;
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Gm,
    /// Nesterov's fast gradient method (`t`-sequence momentum, `gamma = 0`).
    Fgm,
    Ogm,
    /// OGM written as a convex combination of `y_{i+1}` and an auxiliary `z_{i+1}`.
    OgmZform,
    Ogmg,
    OgmgZform,
    /// Generic momentum form with caller-supplied coefficients.
    Accelerated,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Gm,
        Method::Fgm,
        Method::Ogm,
        Method::OgmZform,
        Method::Ogmg,
        Method::OgmgZform,
        Method::Accelerated,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Gm => "gm",
            Method::Fgm => "fgm",
            Method::Ogm => "ogm",
            Method::OgmZform => "ogm_zform",
            Method::Ogmg => "ogmg",
            Method::OgmgZform => "ogmg_zform",
            Method::Accelerated => "accelerated",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.name() == s)
    }
}

/// Appends `steps` iterations to `trace`, restarting the `y` sequence at the
/// current last iterate. `update(i, x_i, y_i, y_{i+1})` returns `x_{i+1}`,
/// with `i` counted from the start of this phase.
fn extend<F>(oracle: &SmoothOracle, trace: &mut Trace, steps: usize, mut update: F) -> Result<()>
where
    F: FnMut(usize, &Vector, &Vector, &Vector) -> Vector,
{
    let inv_l = 1.0 / oracle.lipschitz();
    let offset = trace.n();
    let mut y_prev = trace.last_x().clone();
    for i in 0..steps {
        let x_i = trace.last_x();
        let y_next = x_i - trace.last_grad() * inv_l;
        let x_next = update(i, x_i, &y_prev, &y_next);
        trace.ys.push(y_next.clone());
        trace.push_point(oracle, x_next, offset + i + 1)?;
        y_prev = y_next;
    }
    Ok(())
}

fn extend_momentum(oracle: &SmoothOracle, trace: &mut Trace, coeffs: &MomentumCoeffs) -> Result<()> {
    extend(oracle, trace, coeffs.len(), |i, x, y, y_next| {
        let (b, g) = (coeffs.beta[i], coeffs.gamma[i]);
        y_next + (y_next - y) * b + (y_next - x) * g
    })
}

fn extend_zform(oracle: &SmoothOracle, trace: &mut Trace, variant: ThetaVariant, n: usize) -> Result<()> {
    let seq = theta_sequence(variant, n)?;
    let t = seq.values().to_vec();
    extend(oracle, trace, n, |i, x, y, y_next| {
        let z = y_next + (y_next - y) * (t[i] - 1.0) + (y_next - x) * t[i];
        let w = match variant {
            ThetaVariant::OgmHat => 1.0 / t[i + 1],
            ThetaVariant::OgmgTilde => (2.0 * t[i + 1] - 1.0) / (t[i] * (2.0 * t[i] - 1.0)),
        };
        y_next * (1.0 - w) + z * w
    })
}

/// Momentum coefficients of a method that has them.
pub fn method_coefficients(method: Method, n: usize) -> Result<MomentumCoeffs> {
    match method {
        Method::Gm => {
            if n == 0 {
                return Err(FomError::Parameter("N must be at least 1".into()));
            }
            Ok(MomentumCoeffs::zeros(n))
        }
        Method::Fgm => fgm_coefficients(n),
        Method::Ogm | Method::OgmZform => {
            momentum_coefficients(ThetaVariant::OgmHat, &theta_sequence(ThetaVariant::OgmHat, n)?)
        }
        Method::Ogmg | Method::OgmgZform => {
            momentum_coefficients(ThetaVariant::OgmgTilde, &theta_sequence(ThetaVariant::OgmgTilde, n)?)
        }
        Method::Accelerated => Err(FomError::Parameter(
            "the accelerated form takes caller-supplied coefficients".into(),
        )),
    }
}

/// Runs `method` for `n` iterations from `x0`. `coeffs` is required for
/// [`Method::Accelerated`] and ignored otherwise.
pub fn run_method(
    method: Method,
    oracle: &SmoothOracle,
    x0: &Vector,
    n: usize,
    coeffs: Option<&MomentumCoeffs>,
) -> Result<Trace> {
    if n == 0 {
        return Err(FomError::Parameter("N must be at least 1".into()));
    }
    let mut trace = Trace::start(oracle, x0)?;
    match method {
        Method::Accelerated => {
            let c = coeffs.ok_or_else(|| FomError::Parameter("accelerated form needs momentum coefficients".into()))?;
            if c.len() != n {
                return Err(FomError::Parameter(format!(
                    "accelerated form needs {n} coefficient pairs, got {}",
                    c.len()
                )));
            }
            extend_momentum(oracle, &mut trace, c)?;
        }
        Method::OgmZform => extend_zform(oracle, &mut trace, ThetaVariant::OgmHat, n)?,
        Method::OgmgZform => extend_zform(oracle, &mut trace, ThetaVariant::OgmgTilde, n)?,
        Method::Gm | Method::Fgm | Method::Ogm | Method::Ogmg => {
            extend_momentum(oracle, &mut trace, &method_coefficients(method, n)?)?;
        }
    }
    Ok(trace)
}

/// Accelerated method used before OGM-G in [`run_chain_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainFirst {
    Ogm,
    Fgm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainConfig {
    pub first: ChainFirst,
    /// Iterations of the first phase; `None` means `ceil(N/2)`.
    pub split: Option<usize>,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            first: ChainFirst::Ogm,
            split: None,
        }
    }
}

/// OGM for `ceil(N/2)` iterations, then OGM-G for the remaining `floor(N/2)`
/// started from the OGM output.
pub fn run_chain(oracle: &SmoothOracle, x0: &Vector, n: usize) -> Result<Trace> {
    run_chain_with(oracle, x0, n, &ChainConfig::default())
}

pub fn run_chain_with(oracle: &SmoothOracle, x0: &Vector, n: usize, config: &ChainConfig) -> Result<Trace> {
    if n < 2 {
        return Err(FomError::Parameter("the chained method needs N >= 2".into()));
    }
    let first = config.split.unwrap_or(n.div_ceil(2));
    if first == 0 || first >= n {
        return Err(FomError::Parameter(format!(
            "chain split must leave both phases nonempty, got {first} of {n}"
        )));
    }
    let mut trace = Trace::start(oracle, x0)?;
    let phase_one = match config.first {
        ChainFirst::Ogm => method_coefficients(Method::Ogm, first)?,
        ChainFirst::Fgm => method_coefficients(Method::Fgm, first)?,
    };
    extend_momentum(oracle, &mut trace, &phase_one)?;
    extend_momentum(oracle, &mut trace, &method_coefficients(Method::Ogmg, n - first)?)?;
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterMetrics {
    pub iter: usize,
    pub fval: f64,
    pub grad_norm_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceMetrics {
    pub grad_norm_sq_final: f64,
    /// `f(x_N) - f*`, when the oracle declares `f*`.
    pub func_gap_final: Option<f64>,
    pub per_iter: Vec<IterMetrics>,
}

pub fn trace_metrics(trace: &Trace, oracle: &SmoothOracle) -> TraceMetrics {
    let per_iter: Vec<IterMetrics> = trace
        .fvals
        .iter()
        .zip(&trace.grads)
        .enumerate()
        .map(|(iter, (&fval, g))| IterMetrics {
            iter,
            fval,
            grad_norm_sq: g.norm_squared(),
        })
        .collect();
    let last = per_iter.last().expect("trace always holds x_0");
    TraceMetrics {
        grad_norm_sq_final: last.grad_norm_sq,
        func_gap_final: oracle.f_star().map(|fs| last.fval - fs),
        per_iter,
    }
}
