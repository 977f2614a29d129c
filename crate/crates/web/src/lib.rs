//! WebAssembly entry points for the demo page in `www/`. Each export returns a
//! JSON string; the `*_json` functions are the same operations for native use.

use fom_core::certificate::{dual_certificate, verify_certificate, CertMethod};
use fom_core::engine::{run_method, Method};
use fom_core::schedule::{momentum_coefficients, theta_sequence, ThetaVariant};
use fom_core::stepmatrix::{step_schedule, StepMethod};
use fom_core::tolerance::Tolerances;
use fom_core::worstcase::{verify_exact_bound, worst_instance, Flavor, WorstMethod};
use fom_core::{FomError, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

pub const MAX_THETA_N: usize = 5000;
pub const MAX_WORST_N: usize = 2000;
pub const MAX_CERT_N: usize = 300;

fn check_range(n: usize, max: usize) -> Result<()> {
    if n == 0 || n > max {
        return Err(FomError::Parameter(format!("N must be between 1 and {max}, got {n}")));
    }
    Ok(())
}

#[derive(Serialize)]
struct Curves {
    #[serde(rename = "N")]
    n: usize,
    ogmg_theta: Vec<f64>,
    ogmg_beta: Vec<f64>,
    ogmg_gamma: Vec<f64>,
    ogm_theta: Vec<f64>,
    ogm_beta: Vec<f64>,
    ogm_gamma: Vec<f64>,
    theta0_sq: f64,
    gm_bound: f64,
    ogmg_bound: f64,
}

pub fn theta_curves_json(n: usize) -> Result<String> {
    check_range(n, MAX_THETA_N)?;
    let tilde = theta_sequence(ThetaVariant::OgmgTilde, n)?;
    let hat = theta_sequence(ThetaVariant::OgmHat, n)?;
    let g = momentum_coefficients(ThetaVariant::OgmgTilde, &tilde)?;
    let o = momentum_coefficients(ThetaVariant::OgmHat, &hat)?;
    let curves = Curves {
        n,
        ogmg_theta: tilde.values().to_vec(),
        ogmg_beta: g.beta,
        ogmg_gamma: g.gamma,
        ogm_theta: hat.values().to_vec(),
        ogm_beta: o.beta,
        ogm_gamma: o.gamma,
        theta0_sq: tilde.theta0_sq(),
        gm_bound: 1.0 / (2.0 * n as f64 + 1.0),
        ogmg_bound: 1.0 / tilde.theta0_sq(),
    };
    Ok(serde_json::to_string(&curves)?)
}

#[derive(Serialize)]
struct WorstRun {
    label: String,
    #[serde(rename = "N")]
    n: usize,
    expected: f64,
    measured: f64,
    rel_err: f64,
    pass: bool,
    grad_norm_sq: Vec<f64>,
    fval: Vec<f64>,
}

fn parse_worst(method: &str, flavor: &str) -> Result<(WorstMethod, Flavor)> {
    let m = match method {
        "gm" => WorstMethod::Gm,
        "ogmg" => WorstMethod::Ogmg,
        other => return Err(FomError::Parameter(format!("unknown method `{other}`"))),
    };
    let f = match flavor {
        "huber" => Flavor::Huber,
        "quadratic" => Flavor::Quadratic,
        other => return Err(FomError::Parameter(format!("unknown flavor `{other}`"))),
    };
    Ok((m, f))
}

/// Worst-case run with `L = R = 1`, including the per-iteration trace.
pub fn worst_case_json(method: &str, flavor: &str, n: usize) -> Result<String> {
    check_range(n, MAX_WORST_N)?;
    let (m, f) = parse_worst(method, flavor)?;
    let w = worst_instance(m, f, n, 1.0, 1.0, 2, None)?;
    let rep = verify_exact_bound(&w, &Tolerances::default())?;
    let engine = match m {
        WorstMethod::Gm => Method::Gm,
        WorstMethod::Ogmg => Method::Ogmg,
    };
    let trace = run_method(engine, &w.instance.oracle, &w.instance.x0, n, None)?;
    let run = WorstRun {
        label: w.label(),
        n,
        expected: rep.expected,
        measured: rep.measured,
        rel_err: rep.rel_err,
        pass: rep.pass,
        grad_norm_sq: trace.grads.iter().map(|g| g.norm_squared()).collect(),
        fval: trace.fvals,
    };
    Ok(serde_json::to_string(&run)?)
}

#[derive(Serialize)]
struct CertSummary {
    method: &'static str,
    #[serde(rename = "N")]
    n: usize,
    feasible: bool,
    psd: bool,
    psd_margin: f64,
    dominance: bool,
    max_abs_entry: f64,
    bound: Option<f64>,
}

/// Verifies the analytic certificate of `method` against the triangle of
/// `triangle` (the two may differ, which shows an infeasible pairing).
pub fn certify_json(method: &str, triangle: &str, n: usize) -> Result<String> {
    check_range(n, MAX_CERT_N)?;
    let cert = match method {
        "gm" => CertMethod::Gm,
        "ogmg" => CertMethod::Ogmg,
        other => return Err(FomError::Parameter(format!("no analytic certificate for `{other}`"))),
    };
    let step = match triangle {
        "gm" => StepMethod::Gm,
        "ogm" => StepMethod::Ogm,
        "ogmg" => StepMethod::Ogmg,
        other => return Err(FomError::Parameter(format!("unknown triangle `{other}`"))),
    };
    let h = step_schedule(step, n)?;
    let rep = verify_certificate(&h, &dual_certificate(cert, n)?, &Tolerances::default())?;
    let summary = CertSummary {
        method: step.name(),
        n,
        feasible: rep.feasible,
        psd: rep.psd,
        psd_margin: rep.psd_margin,
        dominance: rep.dominance,
        max_abs_entry: rep.max_abs_entry,
        bound: rep.bound,
    };
    Ok(serde_json::to_string(&summary)?)
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn theta_curves(n: usize) -> std::result::Result<String, JsError> {
    js(theta_curves_json(n))
}

#[wasm_bindgen]
pub fn worst_case(method: &str, flavor: &str, n: usize) -> std::result::Result<String, JsError> {
    js(worst_case_json(method, flavor, n))
}

#[wasm_bindgen]
pub fn certify(method: &str, triangle: &str, n: usize) -> std::result::Result<String, JsError> {
    js(certify_json(method, triangle, n))
}
