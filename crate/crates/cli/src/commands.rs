use crate::args::{
    CertMethodArg, CertifyArgs, FlavorArg, FormatArgs, ProblemArgs, RunArgs, RunMethod, SweepArgs, TableArgs,
    ThetaArgs, VariantArg, WorstArgs,
};
use crate::output::{opt6, sig6, write_csv, write_json};
use crate::problem::load_problem;
use fom_core::certificate::{
    certified_bound, dual_certificate, verify_certificate, CertMethod, DualCertificate, VerifiedCertificate,
};
use fom_core::engine::{run_chain, run_method, trace_metrics, IterMetrics, Method};
use fom_core::schedule::{momentum_coefficients, theta_sequence, ThetaVariant};
use fom_core::stepmatrix::{step_schedule, StepMethod, StepSchedule, TriangleDoc};
use fom_core::tolerance::Tolerances;
use fom_core::worstcase::{verify_exact_bound, worst_instance, Flavor, WorstMethod};
use fom_core::{FomError, Result};
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_REJECTED: i32 = 3;

fn io_err(e: std::io::Error) -> FomError {
    FomError::Internal(format!("write failed: {e}"))
}

fn tolerances(flag: Option<&str>) -> Result<Tolerances> {
    let base = Tolerances::from_env()?;
    match flag {
        Some(spec) => base.with_overrides(spec),
        None => Ok(base),
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(FomError::Parameter("N must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn method_name(m: RunMethod) -> &'static str {
    match m {
        RunMethod::Chain => "chain",
        other => engine_method(other).expect("non-chain").name(),
    }
}

fn engine_method(m: RunMethod) -> Option<Method> {
    Some(match m {
        RunMethod::Gm => Method::Gm,
        RunMethod::Fgm => Method::Fgm,
        RunMethod::Ogm => Method::Ogm,
        RunMethod::OgmZform => Method::OgmZform,
        RunMethod::Ogmg => Method::Ogmg,
        RunMethod::OgmgZform => Method::OgmgZform,
        RunMethod::Chain => return None,
    })
}

/// `L^2 R^2 e / 2` from the analytic certificate, for methods that have one.
fn grad_bound(m: RunMethod, n: usize, l: f64, r: Option<f64>) -> Result<Option<f64>> {
    let cert = match m {
        RunMethod::Gm => CertMethod::Gm,
        RunMethod::Ogmg | RunMethod::OgmgZform => CertMethod::Ogmg,
        _ => return Ok(None),
    };
    let Some(r) = r else { return Ok(None) };
    let e = dual_certificate(cert, n)?.e;
    Ok(Some(0.5 * e * l * l * r * r))
}

#[derive(Debug, Serialize)]
struct RunReport {
    method: &'static str,
    #[serde(rename = "N")]
    n: usize,
    problem: String,
    d: usize,
    #[serde(rename = "L")]
    lipschitz: f64,
    #[serde(rename = "R")]
    r: Option<f64>,
    grad_norm_sq_final: f64,
    func_gap_final: Option<f64>,
    grad_bound: Option<f64>,
    per_iter: Vec<IterMetrics>,
}

fn execute(method: RunMethod, n: usize, problem: &ProblemArgs) -> Result<RunReport> {
    check_n(n)?;
    let p = load_problem(problem, n)?;
    let inst = &p.instance;
    let trace = match engine_method(method) {
        Some(m) => run_method(m, &inst.oracle, &inst.x0, n, None)?,
        None => run_chain(&inst.oracle, &inst.x0, n)?,
    };
    let metrics = trace_metrics(&trace, &inst.oracle);
    let lipschitz = inst.oracle.lipschitz();
    Ok(RunReport {
        method: method_name(method),
        n,
        problem: problem.problem.clone(),
        d: inst.oracle.dim(),
        lipschitz,
        r: p.r,
        grad_norm_sq_final: metrics.grad_norm_sq_final,
        func_gap_final: metrics.func_gap_final,
        grad_bound: grad_bound(method, n, lipschitz, p.r)?,
        per_iter: metrics.per_iter,
    })
}

pub fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<i32> {
    let report = execute(args.method, args.n, &args.problem)?;
    if args.format.json {
        write_json(out, &report).map_err(io_err)?;
    } else {
        let rows: Vec<Vec<String>> = report
            .per_iter
            .iter()
            .map(|m| vec![m.iter.to_string(), sig6(m.fval), sig6(m.grad_norm_sq)])
            .collect();
        write_csv(out, &["iter", "fval", "grad_norm_sq"], &rows).map_err(io_err)?;
    }
    Ok(EXIT_OK)
}

fn read_json_file<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| FomError::Parameter(format!("cannot read {what} `{}`: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn cert_method(m: CertMethodArg) -> (CertMethod, StepMethod) {
    match m {
        CertMethodArg::Gm => (CertMethod::Gm, StepMethod::Gm),
        CertMethodArg::Ogmg => (CertMethod::Ogmg, StepMethod::Ogmg),
    }
}

#[derive(Debug, Serialize)]
struct CertifyReport {
    #[serde(rename = "N")]
    n: usize,
    triangle: &'static str,
    feasible: bool,
    nonnegative: bool,
    equalities_hold: bool,
    max_equality_residual: f64,
    psd: bool,
    psd_margin: f64,
    psd_rank: usize,
    dominance: bool,
    max_abs_entry: f64,
    bound: Option<f64>,
    #[serde(rename = "S", skip_serializing_if = "Option::is_none")]
    s: Option<Vec<Vec<f64>>>,
}

pub fn cmd_certify(args: &CertifyArgs, out: &mut dyn Write) -> Result<i32> {
    let tol = tolerances(args.tol.as_deref())?;
    let need_method = || {
        args.method.ok_or_else(|| {
            FomError::Parameter("certify needs --method unless both --triangle and --cert are given".into())
        })
    };
    let need_n = || {
        let n = args.n.ok_or_else(|| FomError::Parameter("certify --method needs -N".into()))?;
        check_n(n)?;
        Ok::<usize, FomError>(n)
    };
    let schedule: StepSchedule = match &args.triangle {
        Some(path) => read_json_file::<TriangleDoc>(path, "triangle")?.into_schedule()?,
        None => step_schedule(cert_method(need_method()?).1, need_n()?)?,
    };
    let cert: DualCertificate = match &args.cert {
        Some(path) => read_json_file(path, "certificate")?,
        None => dual_certificate(cert_method(need_method()?).0, args.n.unwrap_or(schedule.n()))?,
    };
    let report = verify_certificate(&schedule, &cert, &tol)?;
    let bound = if report.feasible {
        let verified = VerifiedCertificate::new(&schedule, cert.clone(), &tol)?;
        Some(certified_bound(&verified, args.lipschitz, args.r))
    } else {
        None
    };
    let s = if args.full {
        Some(fom_core::certificate::assemble_s(&schedule, &cert)?.to_rows())
    } else {
        None
    };
    let max_equality_residual = report.equality_residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let doc = CertifyReport {
        n: schedule.n(),
        triangle: schedule.method().name(),
        feasible: report.feasible,
        nonnegative: report.nonnegative,
        equalities_hold: report.equalities_hold,
        max_equality_residual,
        psd: report.psd,
        psd_margin: report.psd_margin,
        psd_rank: report.psd_rank,
        dominance: report.dominance,
        max_abs_entry: report.max_abs_entry,
        bound,
        s,
    };
    write_json(out, &doc).map_err(io_err)?;
    Ok(if report.feasible { EXIT_OK } else { EXIT_REJECTED })
}

#[derive(Debug, Serialize)]
struct WorstReport {
    method: &'static str,
    flavor: &'static str,
    #[serde(rename = "N")]
    n: usize,
    expected: f64,
    measured: f64,
    rel_err: f64,
    pass: bool,
    affine_region: Option<bool>,
}

fn worst_parts(m: CertMethodArg, f: FlavorArg) -> (WorstMethod, Flavor) {
    let m = match m {
        CertMethodArg::Gm => WorstMethod::Gm,
        CertMethodArg::Ogmg => WorstMethod::Ogmg,
    };
    let f = match f {
        FlavorArg::Huber => Flavor::Huber,
        FlavorArg::Quadratic => Flavor::Quadratic,
    };
    (m, f)
}

pub fn cmd_worst(args: &WorstArgs, out: &mut dyn Write) -> Result<i32> {
    let tol = tolerances(args.tol.as_deref())?;
    let (m, f) = worst_parts(args.method, args.flavor);
    let w = worst_instance(m, f, args.n, args.lipschitz, args.r, args.d, None)?;
    let rep = verify_exact_bound(&w, &tol)?;
    let doc = WorstReport {
        method: m.name(),
        flavor: f.name(),
        n: args.n,
        expected: rep.expected,
        measured: rep.measured,
        rel_err: rep.rel_err,
        pass: rep.pass,
        affine_region: rep.affine_region,
    };
    if args.format.json {
        write_json(out, &doc).map_err(io_err)?;
    } else {
        let row = vec![
            doc.method.to_string(),
            doc.flavor.to_string(),
            doc.n.to_string(),
            sig6(doc.expected),
            sig6(doc.measured),
            sig6(doc.rel_err),
            doc.pass.to_string(),
        ];
        write_csv(
            out,
            &["method", "flavor", "N", "expected", "measured", "rel_err", "pass"],
            &[row],
        )
        .map_err(io_err)?;
    }
    Ok(if rep.pass { EXIT_OK } else { EXIT_REJECTED })
}

#[derive(Debug, Serialize)]
struct ThetaReport {
    variant: &'static str,
    #[serde(rename = "N")]
    n: usize,
    theta: Vec<f64>,
    theta0_sq: f64,
    beta: Vec<f64>,
    gamma: Vec<f64>,
}

pub fn cmd_theta(args: &ThetaArgs, out: &mut dyn Write) -> Result<i32> {
    let variant = match args.variant {
        VariantArg::Ogmg => ThetaVariant::OgmgTilde,
        VariantArg::Ogm => ThetaVariant::OgmHat,
    };
    let seq = theta_sequence(variant, args.n)?;
    let mc = momentum_coefficients(variant, &seq)?;
    let doc = ThetaReport {
        variant: variant.name(),
        n: args.n,
        theta: seq.values().to_vec(),
        theta0_sq: seq.theta0_sq(),
        beta: mc.beta,
        gamma: mc.gamma,
    };
    if args.format.json {
        write_json(out, &doc).map_err(io_err)?;
    } else {
        let rows: Vec<Vec<String>> = doc
            .theta
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                vec![
                    i.to_string(),
                    sig6(t),
                    opt6(doc.beta.get(i).copied()),
                    opt6(doc.gamma.get(i).copied()),
                ]
            })
            .collect();
        write_csv(out, &["i", "theta", "beta", "gamma"], &rows).map_err(io_err)?;
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct TableRow {
    #[serde(rename = "N")]
    n: usize,
    theta0_sq: f64,
    gm_reciprocal: f64,
    gm_huber_measured: f64,
    ogmg_huber_measured: f64,
    ogmg_quadratic_measured: f64,
}

fn measured_reciprocal(m: WorstMethod, f: Flavor, n: usize, tol: &Tolerances) -> Result<f64> {
    let w = worst_instance(m, f, n, 1.0, 1.0, 1, None)?;
    Ok(1.0 / verify_exact_bound(&w, tol)?.measured)
}

pub fn cmd_table(args: &TableArgs, out: &mut dyn Write) -> Result<i32> {
    let tol = tolerances(args.tol.as_deref())?;
    let mut rows = Vec::with_capacity(args.n_list.len());
    for &n in &args.n_list {
        check_n(n)?;
        rows.push(TableRow {
            n,
            theta0_sq: theta_sequence(ThetaVariant::OgmgTilde, n)?.theta0_sq(),
            gm_reciprocal: 2.0 * n as f64 + 1.0,
            gm_huber_measured: measured_reciprocal(WorstMethod::Gm, Flavor::Huber, n, &tol)?,
            ogmg_huber_measured: measured_reciprocal(WorstMethod::Ogmg, Flavor::Huber, n, &tol)?,
            ogmg_quadratic_measured: measured_reciprocal(WorstMethod::Ogmg, Flavor::Quadratic, n, &tol)?,
        });
    }
    if args.format.json {
        write_json(out, &rows).map_err(io_err)?;
    } else {
        let cells: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    sig6(r.theta0_sq),
                    sig6(r.gm_reciprocal),
                    sig6(r.gm_huber_measured),
                    sig6(r.ogmg_huber_measured),
                    sig6(r.ogmg_quadratic_measured),
                ]
            })
            .collect();
        write_csv(
            out,
            &[
                "N",
                "theta0_sq",
                "gm_reciprocal",
                "gm_huber_measured",
                "ogmg_huber_measured",
                "ogmg_quadratic_measured",
            ],
            &cells,
        )
        .map_err(io_err)?;
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct SweepRow {
    method: &'static str,
    #[serde(rename = "N")]
    n: usize,
    grad_norm_sq_final: f64,
    func_gap_final: Option<f64>,
    grad_bound: Option<f64>,
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<i32> {
    let jobs: Vec<(RunMethod, usize)> = args
        .methods
        .iter()
        .flat_map(|&m| args.n_list.iter().map(move |&n| (m, n)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(m, n)| {
            let r = execute(m, n, &args.problem)?;
            Ok(SweepRow {
                method: r.method,
                n,
                grad_norm_sq_final: r.grad_norm_sq_final,
                func_gap_final: r.func_gap_final,
                grad_bound: r.grad_bound,
            })
        })
        .collect::<Result<Vec<SweepRow>>>()?;
    emit_sweep(&rows, args.format, out)?;
    Ok(EXIT_OK)
}

fn emit_sweep(rows: &[SweepRow], format: FormatArgs, out: &mut dyn Write) -> Result<()> {
    if format.json {
        return write_json(out, &rows).map_err(io_err);
    }
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.method.to_string(),
                r.n.to_string(),
                sig6(r.grad_norm_sq_final),
                opt6(r.func_gap_final),
                opt6(r.grad_bound),
            ]
        })
        .collect();
    write_csv(
        out,
        &["method", "N", "grad_norm_sq_final", "func_gap_final", "grad_bound"],
        &cells,
    )
    .map_err(io_err)
}
