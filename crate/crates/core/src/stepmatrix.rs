//! Step-coefficient triangles of fixed-step first-order methods,
//!
//! ```text
//! x_{i+1} = x_i - (1/L) sum_{k=0}^{i} h_{i+1,k} grad f(x_k),   i = 0..N-1,
//! ```
//!
//! and the identities that tie the OGM-G triangle to its theta sequence.

use crate::error::{FomError, Result};
use crate::report::IdentityReport;
use crate::schedule::{theta_sequence, ThetaSeq, ThetaVariant};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMethod {
    Gm,
    Ogm,
    /// OGM-G triangle from the backward (column) recursion.
    Ogmg,
    /// OGM-G triangle from the row-to-row recursion used by the efficient form.
    OgmgAlt,
    Custom,
}

impl StepMethod {
    pub fn name(self) -> &'static str {
        match self {
            StepMethod::Gm => "gm",
            StepMethod::Ogm => "ogm",
            StepMethod::Ogmg => "ogmg",
            StepMethod::OgmgAlt => "ogmg_alt",
            StepMethod::Custom => "custom",
        }
    }
}

/// Lower-triangular coefficient triangle `h[i+1][k]`, `0 <= k <= i <= N-1`,
/// stored densely row after row.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSchedule {
    n: usize,
    method: StepMethod,
    h: Vec<f64>,
}

fn row_offset(row: usize) -> usize {
    (row - 1) * row / 2
}

impl StepSchedule {
    fn zeros(n: usize, method: StepMethod) -> Self {
        Self {
            n,
            method,
            h: vec![0.0; n * (n + 1) / 2],
        }
    }

    /// A user-supplied triangle; `rows[i]` holds `h[i+1][0..=i]`.
    pub fn from_rows(method: StepMethod, rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(FomError::Parameter("triangle must have at least one row".into()));
        }
        let mut s = Self::zeros(n, method);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != i + 1 {
                return Err(FomError::Parameter(format!(
                    "triangle row {} must have {} entries, found {}",
                    i + 1,
                    i + 1,
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(FomError::Parameter(format!("triangle row {} has non-finite entries", i + 1)));
            }
            let off = row_offset(i + 1);
            s.h[off..off + i + 1].copy_from_slice(row);
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn method(&self) -> StepMethod {
        self.method
    }

    /// Number of stored coefficients, `N(N+1)/2`.
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// `h[row][k]` for `1 <= row <= N`, `0 <= k < row`.
    pub fn get(&self, row: usize, k: usize) -> f64 {
        assert!(row >= 1 && row <= self.n && k < row, "h[{row}][{k}] outside triangle of N = {}", self.n);
        self.h[row_offset(row) + k]
    }

    fn set(&mut self, row: usize, k: usize, v: f64) {
        self.h[row_offset(row) + k] = v;
    }

    /// Coefficients of row `row` (entries `k = 0..row`).
    pub fn row(&self, row: usize) -> &[f64] {
        let off = row_offset(row);
        &self.h[off..off + row]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (1..=self.n).map(|r| self.row(r).to_vec()).collect()
    }

    /// `T[i][j] = sum_{l=i+1}^{N} h[l][j]` for `0 <= j <= i <= N-1`, stored as
    /// nested vectors indexed `[i][j]`.
    pub fn tail_sums(&self) -> Vec<Vec<f64>> {
        let n = self.n;
        let mut t = vec![Vec::new(); n];
        for (i, ti) in t.iter_mut().enumerate() {
            ti.resize(i + 1, 0.0);
        }
        // Column-wise suffix sums, from the bottom row up.
        for j in 0..n {
            let mut acc = 0.0;
            for i in (j..n).rev() {
                acc += self.get(i + 1, j);
                t[i][j] = acc;
            }
        }
        t
    }

    /// Sum of every coefficient in the triangle.
    pub fn total(&self) -> f64 {
        self.h.iter().sum()
    }
}

pub fn step_schedule(method: StepMethod, n: usize) -> Result<StepSchedule> {
    if n == 0 {
        return Err(FomError::Parameter("N must be at least 1".into()));
    }
    match method {
        StepMethod::Gm => {
            let mut s = StepSchedule::zeros(n, method);
            for i in 0..n {
                s.set(i + 1, i, 1.0);
            }
            Ok(s)
        }
        StepMethod::Ogmg => {
            let t = theta_sequence(ThetaVariant::OgmgTilde, n)?;
            Ok(ogmg_column_recursion(&t))
        }
        StepMethod::OgmgAlt => {
            let t = theta_sequence(ThetaVariant::OgmgTilde, n)?;
            Ok(ogmg_row_recursion(&t))
        }
        StepMethod::Ogm => {
            let t = theta_sequence(ThetaVariant::OgmHat, n)?;
            Ok(ogm_row_recursion(&t))
        }
        StepMethod::Custom => Err(FomError::Parameter(
            "custom triangles are loaded with StepSchedule::from_rows".into(),
        )),
    }
}

fn ogmg_column_recursion(seq: &ThetaSeq) -> StepSchedule {
    let n = seq.n();
    let t = seq.values();
    let mut s = StepSchedule::zeros(n, StepMethod::Ogmg);
    for i in 0..n {
        let diag = 1.0 + (2.0 * t[i + 1] - 1.0) / t[i];
        s.set(i + 1, i, diag);
        if i >= 1 {
            s.set(i + 1, i - 1, (t[i] - 1.0) / t[i - 1] * (diag - 1.0));
        }
        for k in (0..i.saturating_sub(1)).rev() {
            let next = s.get(i + 1, k + 1);
            s.set(i + 1, k, (t[k + 1] - 1.0) / t[k] * next);
        }
    }
    s
}

fn ogmg_row_recursion(seq: &ThetaSeq) -> StepSchedule {
    let n = seq.n();
    let t = seq.values();
    let mut s = StepSchedule::zeros(n, StepMethod::OgmgAlt);
    for i in 0..n {
        s.set(i + 1, i, 1.0 + (2.0 * t[i + 1] - 1.0) / t[i]);
        if i >= 1 {
            let c = (t[i] - 1.0) * (2.0 * t[i + 1] - 1.0) / (t[i] * (2.0 * t[i] - 1.0));
            s.set(i + 1, i - 1, c * (s.get(i, i - 1) - 1.0));
            for k in 0..i - 1 {
                s.set(i + 1, k, c * s.get(i, k));
            }
        }
    }
    s
}

fn ogm_row_recursion(seq: &ThetaSeq) -> StepSchedule {
    let n = seq.n();
    let t = seq.values();
    let mut s = StepSchedule::zeros(n, StepMethod::Ogm);
    for i in 0..n {
        s.set(i + 1, i, 1.0 + (2.0 * t[i] - 1.0) / t[i + 1]);
        if i >= 1 {
            let c = (t[i] - 1.0) / t[i + 1];
            s.set(i + 1, i - 1, c * (s.get(i, i - 1) - 1.0));
            for k in 0..i - 1 {
                s.set(i + 1, k, c * s.get(i, k));
            }
        }
    }
    s
}

fn require_tilde(seq: &ThetaSeq) -> Result<()> {
    if seq.variant() == ThetaVariant::OgmgTilde {
        Ok(())
    } else {
        Err(FomError::Parameter("an OGM-G (tilde) theta sequence is required".into()))
    }
}

/// Closed form of the OGM-G coefficient below the first subdiagonal,
/// `h[i][j] = t_i^2 (2 t_i - 1) / (t_j t_{j+1}^2)` for `2 <= i <= N`, `0 <= j <= i-2`.
pub fn closed_form_h(i: usize, j: usize, seq: &ThetaSeq) -> Result<f64> {
    require_tilde(seq)?;
    let n = seq.n();
    if i < 2 || i > n || j + 2 > i {
        return Err(FomError::Parameter(format!(
            "closed form needs 2 <= i <= N = {n} and 0 <= j <= i-2, got (i, j) = ({i}, {j})"
        )));
    }
    let t = seq.values();
    Ok(t[i] * t[i] * (2.0 * t[i] - 1.0) / (t[j] * t[j + 1] * t[j + 1]))
}

/// Compares every admissible recursive entry with [`closed_form_h`].
pub fn closed_form_report(schedule: &StepSchedule, seq: &ThetaSeq, tol: f64) -> Result<IdentityReport> {
    check_ogmg_pair(schedule, seq)?;
    let mut rep = IdentityReport::new();
    for i in 2..=seq.n() {
        for j in 0..=i - 2 {
            rep.record("h[i][j] closed form", &[i, j], schedule.get(i, j), closed_form_h(i, j, seq)?, tol);
        }
    }
    Ok(rep)
}

fn check_ogmg_pair(schedule: &StepSchedule, seq: &ThetaSeq) -> Result<()> {
    require_tilde(seq)?;
    if !matches!(schedule.method, StepMethod::Ogmg | StepMethod::OgmgAlt) {
        return Err(FomError::Parameter(format!(
            "an OGM-G triangle is required, got {}",
            schedule.method.name()
        )));
    }
    if schedule.n != seq.n() {
        return Err(FomError::Parameter(format!(
            "triangle has N = {} but theta sequence has N = {}",
            schedule.n,
            seq.n()
        )));
    }
    Ok(())
}

/// Column tail sums `sum_{l=i+1}^{N} h[l][j]` of the OGM-G triangle:
/// `(t_0 + 1)/2` at `(0, 0)`, `t_i` on the diagonal `j = i >= 1`, and
/// `t_{i+1}^4 / (t_j t_{j+1}^2)` for `1 <= i <= N-1`, `j < i`.
pub fn column_tail_sums(schedule: &StepSchedule, seq: &ThetaSeq, tol: f64) -> Result<IdentityReport> {
    check_ogmg_pair(schedule, seq)?;
    let n = seq.n();
    let t = seq.values();
    let tails = schedule.tail_sums();
    let mut rep = IdentityReport::new();
    rep.record("tail sum (0,0)", &[0, 0], tails[0][0], 0.5 * (t[0] + 1.0), tol);
    for i in 1..n {
        rep.record("tail sum (i,i)", &[i, i], tails[i][i], t[i], tol);
        for j in 0..i {
            let rhs = t[i + 1].powi(4) / (t[j] * t[j + 1] * t[j + 1]);
            rep.record("tail sum (i,j)", &[i, j], tails[i][j], rhs, tol);
        }
    }
    Ok(rep)
}

/// Mirror relation `h_ogm[i+1][k] = h_ogmg[N-k][N-i-1]`.
pub fn symmetry_check(h_ogm: &StepSchedule, h_ogmg: &StepSchedule, tol: f64) -> Result<IdentityReport> {
    if h_ogm.method != StepMethod::Ogm || !matches!(h_ogmg.method, StepMethod::Ogmg | StepMethod::OgmgAlt) {
        return Err(FomError::Parameter(format!(
            "symmetry check needs (ogm, ogmg) triangles, got ({}, {})",
            h_ogm.method.name(),
            h_ogmg.method.name()
        )));
    }
    let n = h_ogm.n;
    if h_ogmg.n != n {
        return Err(FomError::Parameter(format!("triangles have N = {n} and N = {}", h_ogmg.n)));
    }
    let mut rep = IdentityReport::new();
    for i in 0..n {
        for k in 0..=i {
            rep.record("h_ogm[i+1][k] = h_ogmg[N-k][N-i-1]", &[i, k], h_ogm.get(i + 1, k), h_ogmg.get(n - k, n - i - 1), tol);
        }
    }
    Ok(rep)
}

/// Entrywise comparison of two triangles of equal N.
pub fn compare_schedules(a: &StepSchedule, b: &StepSchedule, tol: f64) -> Result<IdentityReport> {
    if a.n != b.n {
        return Err(FomError::Parameter(format!("triangles have N = {} and N = {}", a.n, b.n)));
    }
    let mut rep = IdentityReport::new();
    for row in 1..=a.n {
        for k in 0..row {
            rep.record("entrywise", &[row, k], a.get(row, k), b.get(row, k), tol);
        }
    }
    Ok(rep)
}

/// JSON form of a triangle: `rows[i]` holds `h[i+1][0..=i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriangleDoc {
    #[serde(rename = "N")]
    pub n: usize,
    pub method: StepMethod,
    pub h: Vec<Vec<f64>>,
}

impl TriangleDoc {
    pub fn from_schedule(s: &StepSchedule) -> Self {
        Self {
            n: s.n,
            method: s.method,
            h: s.to_rows(),
        }
    }

    pub fn into_schedule(self) -> Result<StepSchedule> {
        if self.h.len() != self.n {
            return Err(FomError::Parameter(format!(
                "triangle declares N = {} but has {} rows",
                self.n,
                self.h.len()
            )));
        }
        StepSchedule::from_rows(self.method, &self.h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn gm_n3() {
        let s = step_schedule(StepMethod::Gm, 3).unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(s.to_rows(), vec![vec![1.0], vec![0.0, 1.0], vec![0.0, 0.0, 1.0]]);
    }

    #[test]
    fn ogmg_n1() {
        let s = step_schedule(StepMethod::Ogmg, 1).unwrap();
        assert_eq!(s.get(1, 0), 1.5);
        let t = theta_sequence(ThetaVariant::OgmgTilde, 1).unwrap();
        assert_eq!(s.get(1, 0), 0.5 * (t.get(0) + 1.0));
    }

    #[test]
    fn ogmg_n2() {
        let s = step_schedule(StepMethod::Ogmg, 2).unwrap();
        assert!(close(s.get(1, 0), 1.78672, 1e-5));
        assert!(close(s.get(2, 1), 1.61803, 1e-5));
        assert!(close(s.get(2, 0), 0.13438, 2e-5));
        let t = theta_sequence(ThetaVariant::OgmgTilde, 2).unwrap();
        let cf = closed_form_h(2, 0, &t).unwrap();
        assert!(close(cf, 1.0 / (t.get(0) * t.get(1) * t.get(1)), 1e-15));
        assert!((cf - s.get(2, 0)).abs() <= 1e-11 * cf);
    }

    #[test]
    fn closed_form_n3() {
        let s = step_schedule(StepMethod::Ogmg, 3).unwrap();
        let t = theta_sequence(ThetaVariant::OgmgTilde, 3).unwrap();
        for (i, j) in [(3, 1), (3, 0), (2, 0)] {
            let cf = closed_form_h(i, j, &t).unwrap();
            assert!((cf - s.get(i, j)).abs() <= 1e-11 * cf, "({i},{j})");
        }
        assert!(closed_form_h(3, 2, &t).is_err());
        assert!(closed_form_h(1, 0, &t).is_err());
        assert!(closed_form_h(4, 0, &t).is_err());
        let hat = theta_sequence(ThetaVariant::OgmHat, 3).unwrap();
        assert!(closed_form_h(3, 0, &hat).is_err());
    }

    #[test]
    fn tail_sums_n2() {
        let s = step_schedule(StepMethod::Ogmg, 2).unwrap();
        let t = theta_sequence(ThetaVariant::OgmgTilde, 2).unwrap();
        let tails = s.tail_sums();
        assert!(close(tails[0][0], 1.921118, 1e-6));
        assert!(close(tails[0][0], 0.5 * (t.get(0) + 1.0), 1e-14));
        assert!(close(tails[1][1], t.get(1), 1e-14));
        assert!(close(tails[1][0], 1.0 / (t.get(0) * t.get(1) * t.get(1)), 1e-14));
        assert!(column_tail_sums(&s, &t, 1e-10).unwrap().passed());
    }

    #[test]
    fn tail_sum_mismatch_is_reported() {
        let t = theta_sequence(ThetaVariant::OgmgTilde, 4).unwrap();
        let mut rows = step_schedule(StepMethod::Ogmg, 4).unwrap().to_rows();
        rows[3][1] += 1e-3;
        let bad = StepSchedule::from_rows(StepMethod::Ogmg, &rows).unwrap();
        let rep = column_tail_sums(&bad, &t, 1e-10).unwrap();
        assert!(!rep.passed());
        assert!(rep.violations.iter().any(|v| v.index == vec![1, 1] || v.index == vec![2, 1]));
        let gm = step_schedule(StepMethod::Gm, 4).unwrap();
        assert!(column_tail_sums(&gm, &t, 1e-10).is_err());
    }

    #[test]
    fn symmetry_small() {
        let g1 = step_schedule(StepMethod::Ogmg, 1).unwrap();
        let o1 = step_schedule(StepMethod::Ogm, 1).unwrap();
        assert_eq!(o1.get(1, 0), 1.5);
        assert!(symmetry_check(&o1, &g1, 1e-11).unwrap().passed());

        let g2 = step_schedule(StepMethod::Ogmg, 2).unwrap();
        let o2 = step_schedule(StepMethod::Ogm, 2).unwrap();
        assert!(close(o2.get(1, 0), 1.61803, 1e-5));
        assert!(close(o2.get(1, 0), g2.get(2, 1), 1e-14));
        assert!(close(o2.get(2, 0), g2.get(2, 0), 1e-14));
        assert!(symmetry_check(&o2, &g2, 1e-11).unwrap().passed());
        assert!(symmetry_check(&g2, &o2, 1e-11).is_err());
    }

    #[test]
    fn symmetry_reports_first_failure() {
        let g = step_schedule(StepMethod::Ogmg, 3).unwrap();
        let mut rows = step_schedule(StepMethod::Ogm, 3).unwrap().to_rows();
        rows[1][0] *= 1.01;
        let o = StepSchedule::from_rows(StepMethod::Custom, &rows).unwrap();
        let o = StepSchedule { method: StepMethod::Ogm, ..o };
        let rep = symmetry_check(&o, &g, 1e-11).unwrap();
        assert_eq!(rep.first_violation().unwrap().index, vec![1, 0]);
    }

    #[test]
    fn zero_n_rejected() {
        assert!(step_schedule(StepMethod::Ogmg, 0).is_err());
        assert!(step_schedule(StepMethod::Custom, 3).is_err());
    }

    #[test]
    fn from_rows_validates_shape() {
        assert!(StepSchedule::from_rows(StepMethod::Custom, &[vec![1.0], vec![1.0]]).is_err());
        assert!(StepSchedule::from_rows(StepMethod::Custom, &[]).is_err());
        assert!(StepSchedule::from_rows(StepMethod::Custom, &[vec![f64::NAN]]).is_err());
    }

    #[test]
    fn triangle_doc_round_trip() {
        let s = step_schedule(StepMethod::Ogm, 4).unwrap();
        let json = serde_json::to_string(&TriangleDoc::from_schedule(&s)).unwrap();
        assert!(json.contains("\"N\":4"));
        assert!(json.contains("\"method\":\"ogm\""));
        let back: TriangleDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(back.into_schedule().unwrap(), s);
        let bad = TriangleDoc { n: 3, method: StepMethod::Custom, h: vec![vec![1.0]] };
        assert!(bad.into_schedule().is_err());
    }

    #[test]
    fn total_step_sum() {
        for n in [1, 2, 7, 40] {
            let s = step_schedule(StepMethod::Ogmg, n).unwrap();
            let t = theta_sequence(ThetaVariant::OgmgTilde, n).unwrap();
            let expect = 0.5 * (t.theta0_sq() - 1.0);
            assert!((s.total() - expect).abs() <= 1e-10 * expect);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]
            #[test]
            fn ogmg_identities(n in 1usize..=200) {
                let t = theta_sequence(ThetaVariant::OgmgTilde, n).unwrap();
                let h = step_schedule(StepMethod::Ogmg, n).unwrap();
                let alt = step_schedule(StepMethod::OgmgAlt, n).unwrap();
                let ogm = step_schedule(StepMethod::Ogm, n).unwrap();
                prop_assert!(compare_schedules(&h, &alt, 1e-12).unwrap().passed());
                prop_assert!(closed_form_report(&h, &t, 1e-11).unwrap().passed());
                prop_assert!(column_tail_sums(&h, &t, 1e-10).unwrap().passed());
                prop_assert!(symmetry_check(&ogm, &h, 1e-11).unwrap().passed());
                for i in 0..n {
                    let diag = 1.0 + (2.0 * t.get(i + 1) - 1.0) / t.get(i);
                    prop_assert_eq!(h.get(i + 1, i), diag);
                }
            }
        }
    }
}
