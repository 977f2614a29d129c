//! Relaxed performance-estimation matrices and dual certificates.
//!
//! With `g_i = grad f(x_i) / (L R)` and `delta_i = (f(x_i) - f*) / (L R^2)`,
//! the cocoercivity inequalities on consecutive pairs `(i-1, i)`, on the
//! pairs `(N, i)` and on `(N, *)` read `tr(G^T M G) <= ...` for the matrices
//! `A_{i-1,i}`, `B_{N,i}` and `C_N` built here (indices `0..=N`). A dual
//! certificate `(a, b, c, e)` with
//!
//! ```text
//! S = sum_i a_i A_{i-1,i} + sum_i b_i B_{N,i} + c C_N - u_N u_N^T  >= 0
//! -a_1 + b_0 + e = 0,  a_N - sum_i b_i - c = 0,  a_i - a_{i+1} + b_i = 0
//! ```
//!
//! proves `||grad f(x_N)||^2 <= L^2 R^2 e / 2` whenever `f(x_0) - f* <= L R^2 / 2`.

use crate::error::{FomError, Result};
use crate::linalg::SymMatrix;
use crate::schedule::{theta_sequence, ThetaVariant};
use crate::stepmatrix::StepSchedule;
use crate::tolerance::Tolerances;
use serde::{Deserialize, Serialize};

/// Absolute agreement required between the two constructions of `S`.
pub const ASSEMBLY_TOL: f64 = 1e-12;

/// Multipliers `a_1..a_N`, `b_0..b_{N-1}`, `c` and `e`. `a[i-1]` holds `a_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualCertificate {
    #[serde(rename = "N")]
    pub n: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: f64,
    pub e: f64,
}

impl DualCertificate {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: f64, e: f64) -> Result<Self> {
        let cert = Self { n: a.len(), a, b, c, e };
        cert.check_shape()?;
        Ok(cert)
    }

    pub fn check_shape(&self) -> Result<()> {
        if self.n == 0 || self.a.len() != self.n || self.b.len() != self.n {
            return Err(FomError::Parameter(format!(
                "certificate with N = {} needs {} entries in a and b, found {} and {}",
                self.n,
                self.n,
                self.a.len(),
                self.b.len()
            )));
        }
        Ok(())
    }

    /// `a_i` for `1 <= i <= N`.
    pub fn a(&self, i: usize) -> f64 {
        self.a[i - 1]
    }

    /// Residuals of `-a_1 + b_0 + e`, `a_N - sum b - c`, then
    /// `a_i - a_{i+1} + b_i` for `i = 1..N-1`, each paired with the sum of the
    /// magnitudes of its terms.
    fn equality_terms(&self) -> Vec<(f64, f64)> {
        let n = self.n;
        let mut out = Vec::with_capacity(n + 1);
        out.push((
            -self.a(1) + self.b[0] + self.e,
            self.a(1).abs() + self.b[0].abs() + self.e.abs(),
        ));
        let bsum: f64 = self.b.iter().sum();
        let babs: f64 = self.b.iter().map(|v| v.abs()).sum();
        out.push((self.a(n) - bsum - self.c, self.a(n).abs() + babs + self.c.abs()));
        for i in 1..n {
            out.push((
                self.a(i) - self.a(i + 1) + self.b[i],
                self.a(i).abs() + self.a(i + 1).abs() + self.b[i].abs(),
            ));
        }
        out
    }

    pub fn equality_residuals(&self) -> Vec<f64> {
        self.equality_terms().into_iter().map(|(r, _)| r).collect()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.a.iter().chain(&self.b).chain([&self.c, &self.e]).all(|&v| v >= 0.0)
    }
}

// Rank-structured writers shared by `pep_matrices` and the matrix-sum route
// of `assemble_s`. Each adds `alpha` times the named matrix.

fn add_a(m: &mut SymMatrix, h: &StepSchedule, i: usize, alpha: f64) {
    m.add_half_diff_outer(alpha, i - 1, i);
    for (k, &hik) in h.row(i).iter().enumerate() {
        m.add_half_sym_outer(alpha * hik, i, k);
    }
}

fn add_b(m: &mut SymMatrix, h: &StepSchedule, i: usize, alpha: f64) {
    let n = h.n();
    m.add_half_diff_outer(alpha, n, i);
    for l in i + 1..=n {
        for (k, &hlk) in h.row(l).iter().enumerate() {
            m.add_half_sym_outer(-alpha * hlk, i, k);
        }
    }
}

fn add_c(m: &mut SymMatrix, n: usize, alpha: f64) {
    m.add(n, n, 0.5 * alpha);
}

/// The constraint matrices of the relaxed problem, each of order `N+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PepMatrices {
    /// `A_{i-1,i}` for `i = 1..N` (entry `i-1`).
    pub a: Vec<SymMatrix>,
    /// `B_{N,i}` for `i = 0..N-1`.
    pub b: Vec<SymMatrix>,
    pub c: SymMatrix,
}

pub fn pep_matrices(schedule: &StepSchedule) -> PepMatrices {
    let n = schedule.n();
    let a = (1..=n)
        .map(|i| {
            let mut m = SymMatrix::zeros(n + 1);
            add_a(&mut m, schedule, i, 1.0);
            m
        })
        .collect();
    let b = (0..n)
        .map(|i| {
            let mut m = SymMatrix::zeros(n + 1);
            add_b(&mut m, schedule, i, 1.0);
            m
        })
        .collect();
    let mut c = SymMatrix::zeros(n + 1);
    add_c(&mut c, n, 1.0);
    PepMatrices { a, b, c }
}

/// `S` as the weighted sum of the constraint matrices.
fn assemble_s_by_sum(h: &StepSchedule, cert: &DualCertificate) -> SymMatrix {
    let n = h.n();
    let mut s = SymMatrix::zeros(n + 1);
    for i in 1..=n {
        add_a(&mut s, h, i, cert.a(i));
    }
    for i in 0..n {
        add_b(&mut s, h, i, cert.b[i]);
    }
    add_c(&mut s, n, cert.c);
    s.add(n, n, -1.0);
    s
}

/// `S` from the closed entrywise expressions in terms of column tail sums.
fn assemble_s_entrywise(h: &StepSchedule, cert: &DualCertificate) -> SymMatrix {
    let n = h.n();
    let t = h.tail_sums();
    let (a, b) = (|i: usize| cert.a(i), &cert.b);
    let mut s2 = SymMatrix::zeros(n + 1);
    s2.set(0, 0, a(1) + b[0] * (1.0 - 2.0 * t[0][0]));
    for i in 1..n {
        s2.set(i, i, a(i) + a(i + 1) + b[i] * (1.0 - 2.0 * t[i][i]));
        s2.set(i, i - 1, a(i) * (h.get(i, i - 1) - 1.0) - b[i] * t[i][i - 1] - b[i - 1] * t[i][i]);
        for j in 0..i.saturating_sub(1) {
            s2.set(i, j, a(i) * h.get(i, j) - b[i] * t[i][j] - b[j] * t[i][i]);
        }
    }
    let bsum: f64 = b.iter().sum();
    s2.set(n, n, a(n) + bsum + cert.c - 2.0);
    s2.set(n, n - 1, a(n) * (h.get(n, n - 1) - 1.0) - b[n - 1]);
    for j in 0..n.saturating_sub(1) {
        s2.set(n, j, a(n) * h.get(n, j) - b[j]);
    }
    let mut s = SymMatrix::zeros(n + 1);
    s.add_scaled(0.5, &s2);
    s
}

fn check_pair(schedule: &StepSchedule, cert: &DualCertificate) -> Result<()> {
    cert.check_shape()?;
    if cert.n != schedule.n() {
        return Err(FomError::Parameter(format!(
            "certificate has N = {} but the triangle has N = {}",
            cert.n,
            schedule.n()
        )));
    }
    Ok(())
}

/// Builds `S(h, a, b, c)` twice, as a sum of constraint matrices and from the
/// entrywise formulas, and returns the entrywise one after checking that
/// both agree to [`ASSEMBLY_TOL`].
pub fn assemble_s(schedule: &StepSchedule, cert: &DualCertificate) -> Result<SymMatrix> {
    check_pair(schedule, cert)?;
    let by_sum = assemble_s_by_sum(schedule, cert);
    let entrywise = assemble_s_entrywise(schedule, cert);
    let diff = by_sum.max_abs_diff(&entrywise);
    if !(diff <= ASSEMBLY_TOL) {
        return Err(FomError::Internal(format!(
            "matrix-sum and entrywise constructions of S differ by {diff:e}"
        )));
    }
    Ok(entrywise)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertMethod {
    Gm,
    Ogmg,
}

/// The analytic certificates for GM and OGM-G.
pub fn dual_certificate(method: CertMethod, n: usize) -> Result<DualCertificate> {
    if n == 0 {
        return Err(FomError::Parameter("N must be at least 1".into()));
    }
    let nf = n as f64;
    match method {
        CertMethod::Gm => {
            let e = 2.0 / (2.0 * nf + 1.0);
            let a = (1..=n)
                .map(|i| {
                    let i = i as f64;
                    2.0 * (nf + i) / ((nf - i + 1.0) * (2.0 * nf + 1.0))
                })
                .collect();
            let b = (0..n)
                .map(|i| {
                    if i == 0 {
                        2.0 / (nf * (2.0 * nf + 1.0))
                    } else {
                        let r = (n - i) as f64;
                        2.0 / (r * (r + 1.0))
                    }
                })
                .collect();
            DualCertificate::new(a, b, e, e)
        }
        CertMethod::Ogmg => {
            let th = theta_sequence(ThetaVariant::OgmgTilde, n)?;
            let t = th.values();
            let a = (1..=n).map(|i| 1.0 / (t[i] * t[i])).collect();
            let b = (0..n).map(|i| 1.0 / (t[i] * t[i + 1] * t[i + 1])).collect();
            let e = 2.0 / th.theta0_sq();
            DualCertificate::new(a, b, e, e)
        }
    }
}

/// Outcome of [`verify_certificate`]. `bound` is `e/2`, the certified value
/// of `||grad f(x_N)||^2 / (L R)^2`, present only when feasible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub feasible: bool,
    pub nonnegative: bool,
    pub equalities_hold: bool,
    pub equality_residuals: Vec<f64>,
    pub psd: bool,
    pub psd_margin: f64,
    pub psd_rank: usize,
    pub dominance: bool,
    pub max_abs_entry: f64,
    pub bound: Option<f64>,
}

/// Checks sign constraints, the equality constraints and `S >= 0`. The PSD
/// decision comes from a pivoted factorization; diagonal dominance is
/// reported alongside as an independent sufficient condition.
pub fn verify_certificate(
    schedule: &StepSchedule,
    cert: &DualCertificate,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    check_pair(schedule, cert)?;
    let all_finite = cert.a.iter().chain(&cert.b).chain([&cert.c, &cert.e]).all(|v| v.is_finite());
    let nonnegative = all_finite && cert.is_nonnegative();
    let terms = cert.equality_terms();
    let equalities_hold = terms.iter().all(|&(r, scale)| r.abs() <= tol.equality * (1.0 + scale));
    let s = assemble_s(schedule, cert)?;
    let max_abs_entry = s.max_abs();
    let psd_test = s.psd_test(tol.psd * max_abs_entry.max(1.0));
    let dominance = s.is_diagonally_dominant(tol.dominance);
    let feasible = nonnegative && equalities_hold && psd_test.psd;
    Ok(VerificationReport {
        feasible,
        nonnegative,
        equalities_hold,
        equality_residuals: terms.into_iter().map(|(r, _)| r).collect(),
        psd: psd_test.psd,
        psd_margin: psd_test.margin,
        psd_rank: psd_test.rank,
        dominance,
        max_abs_entry,
        bound: feasible.then_some(0.5 * cert.e),
    })
}

/// A certificate that passed [`verify_certificate`] for its triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifiedCertificate {
    cert: DualCertificate,
    report: VerificationReport,
}

impl VerifiedCertificate {
    /// Verifies `cert`; an infeasible certificate is a contract error.
    pub fn new(schedule: &StepSchedule, cert: DualCertificate, tol: &Tolerances) -> Result<Self> {
        let report = verify_certificate(schedule, &cert, tol)?;
        if !report.feasible {
            return Err(FomError::Contract(format!(
                "certificate is not feasible (nonnegative: {}, equalities: {}, psd: {})",
                report.nonnegative, report.equalities_hold, report.psd
            )));
        }
        Ok(Self { cert, report })
    }

    pub fn certificate(&self) -> &DualCertificate {
        &self.cert
    }

    pub fn report(&self) -> &VerificationReport {
        &self.report
    }
}

/// `L^2 R^2 e / 2`.
pub fn certified_bound(verified: &VerifiedCertificate, lipschitz: f64, r: f64) -> f64 {
    lipschitz * lipschitz * r * r * 0.5 * verified.cert.e
}
