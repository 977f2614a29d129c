//! Instances on which GM and OGM-G meet their gradient-norm bounds exactly.
//!
//! Every instance starts with `f(x0) - f* = L R^2 / 2`. GM is tight on a
//! Huber function with `r0 = R / sqrt(2N+1)`; OGM-G is tight both on a Huber
//! function with `r0 = R / theta_0` and on `(L/2)||x||^2`.

use crate::engine::{run_method, Method};
use crate::error::{FomError, Result};
use crate::oracle::{make_instance, InstanceKind, ProblemInstance, Vector};
use crate::schedule::{theta_sequence, ThetaVariant};
use crate::tolerance::Tolerances;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorstMethod {
    Gm,
    Ogmg,
}

impl WorstMethod {
    pub fn name(self) -> &'static str {
        match self {
            WorstMethod::Gm => "gm",
            WorstMethod::Ogmg => "ogmg",
        }
    }

    fn engine_method(self) -> Method {
        match self {
            WorstMethod::Gm => Method::Gm,
            WorstMethod::Ogmg => Method::Ogmg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Huber,
    Quadratic,
}

impl Flavor {
    pub fn name(self) -> &'static str {
        match self {
            Flavor::Huber => "huber",
            Flavor::Quadratic => "quadratic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorstInstance {
    pub instance: ProblemInstance,
    pub method: WorstMethod,
    pub flavor: Flavor,
    pub n: usize,
    /// `||grad f(x_N)||^2` the method attains.
    pub expected_grad_norm_sq: f64,
}

impl WorstInstance {
    /// The minimizer, which is the origin for every flavor.
    pub fn minimizer(&self) -> Vector {
        Vector::zeros(self.instance.oracle.dim())
    }

    pub fn label(&self) -> String {
        format!("{}-{}", self.method.name(), self.flavor.name())
    }
}

fn unit_direction(d: usize, direction: Option<Vector>) -> Result<Vector> {
    if d == 0 {
        return Err(FomError::Parameter("dimension d must be at least 1".into()));
    }
    match direction {
        None => {
            let mut e1 = Vector::zeros(d);
            e1[0] = 1.0;
            Ok(e1)
        }
        Some(nu) => {
            if nu.len() != d {
                return Err(FomError::Parameter(format!(
                    "direction has length {} but d = {d}",
                    nu.len()
                )));
            }
            let norm = nu.norm();
            if !((norm - 1.0).abs() <= 1e-12) {
                return Err(FomError::Parameter(format!("direction must have unit norm, got {norm}")));
            }
            Ok(nu)
        }
    }
}

pub fn worst_instance(
    method: WorstMethod,
    flavor: Flavor,
    n: usize,
    lipschitz: f64,
    r: f64,
    d: usize,
    direction: Option<Vector>,
) -> Result<WorstInstance> {
    if n == 0 {
        return Err(FomError::Parameter("N must be at least 1".into()));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(FomError::Parameter(format!("R must be positive and finite, got {r}")));
    }
    let nu = unit_direction(d, direction)?;
    let (kind, start, expected) = match (method, flavor) {
        (WorstMethod::Gm, Flavor::Quadratic) => {
            return Err(FomError::Unsupported(
                "GM has no quadratic worst case; use the huber flavor".into(),
            ))
        }
        (WorstMethod::Gm, Flavor::Huber) => {
            let s = (2.0 * n as f64 + 1.0).sqrt();
            let kind = InstanceKind::Huber {
                lipschitz,
                r0: r / s,
            };
            (kind, (n as f64 + 1.0) / s * r, lipschitz * lipschitz * r * r / (s * s))
        }
        (WorstMethod::Ogmg, flavor) => {
            let t0sq = theta_sequence(ThetaVariant::OgmgTilde, n)?.theta0_sq();
            let t0 = t0sq.sqrt();
            let expected = lipschitz * lipschitz * r * r / t0sq;
            match flavor {
                Flavor::Huber => (
                    InstanceKind::Huber {
                        lipschitz,
                        r0: r / t0,
                    },
                    (t0sq + 1.0) / (2.0 * t0) * r,
                    expected,
                ),
                Flavor::Quadratic => (InstanceKind::Quadratic { lipschitz }, r, expected),
            }
        }
    };
    let oracle = make_instance(kind, d)?;
    let x0 = nu * start;
    let rbar = x0.norm();
    let instance = ProblemInstance::new(oracle, x0)?.with_r(r)?.with_rbar(rbar)?;
    Ok(WorstInstance {
        instance,
        method,
        flavor,
        n,
        expected_grad_norm_sq: expected,
    })
}

/// Result of running the matching method on a worst-case instance.
/// `affine_region` is `None` for the quadratic flavor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactBoundReport {
    pub expected: f64,
    pub measured: f64,
    pub rel_err: f64,
    pub pass: bool,
    pub affine_region: Option<bool>,
    /// Largest `||g_i - g_0|| / ||g_0||` along the run.
    pub max_grad_deviation: f64,
}

pub fn verify_exact_bound(w: &WorstInstance, tol: &Tolerances) -> Result<ExactBoundReport> {
    let inst = &w.instance;
    let trace = run_method(w.method.engine_method(), &inst.oracle, &inst.x0, w.n, None)?;
    let measured = trace.last_grad().norm_squared();
    let expected = w.expected_grad_norm_sq;
    let rel_err = (measured - expected).abs() / expected;
    let affine_region = inst.oracle.huber_radius().map(|r0| {
        let floor = r0 * (1.0 - tol.exact);
        trace.xs.iter().all(|x| x.norm() >= floor)
    });
    let g0 = &trace.grads[0];
    let g0n = g0.norm();
    let max_grad_deviation = trace
        .grads
        .iter()
        .map(|g| (g - g0).norm() / g0n)
        .fold(0.0, f64::max);
    let pass = rel_err <= tol.exact && affine_region.unwrap_or(true);
    Ok(ExactBoundReport {
        expected,
        measured,
        rel_err,
        pass,
        affine_region,
        max_grad_deviation,
    })
}

/// `||x0 - x*|| / R` on the OGM-G Huber instance, `(theta_0^2 + 1) / (2 theta_0)`.
pub fn ogmg_huber_distance_ratio(n: usize) -> Result<f64> {
    let t0sq = theta_sequence(ThetaVariant::OgmgTilde, n)?.theta0_sq();
    Ok((t0sq + 1.0) / (2.0 * t0sq.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn ifc_gap(w: &WorstInstance) -> f64 {
        let o = &w.instance.oracle;
        o.value(&w.instance.x0) - o.f_star().unwrap()
    }

    #[test]
    fn gm_huber_n1() {
        let w = worst_instance(WorstMethod::Gm, Flavor::Huber, 1, 1.0, 1.0, 3, None).unwrap();
        assert!((w.instance.x0[0] - 2.0 / 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(w.instance.x0[1], 0.0);
        assert!((w.expected_grad_norm_sq - 1.0 / 3.0).abs() < 1e-16);
        assert!((ifc_gap(&w) - 0.5).abs() <= 1e-12 * 0.5);
        let r = crate::oracle::radius_from_gap(&w.instance.oracle, &w.instance.x0).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ogmg_quadratic_n1() {
        let w = worst_instance(WorstMethod::Ogmg, Flavor::Quadratic, 1, 1.0, 1.0, 8, None).unwrap();
        assert_eq!(w.instance.x0[0], 1.0);
        assert!((w.expected_grad_norm_sq - 0.25).abs() < 1e-15);
        let rep = verify_exact_bound(&w, &tol()).unwrap();
        assert!(rep.pass && rep.affine_region.is_none());
    }

    #[test]
    fn ogmg_huber_n2() {
        let w = worst_instance(WorstMethod::Ogmg, Flavor::Huber, 2, 1.0, 1.0, 8, None).unwrap();
        assert!((w.instance.x0[0] - 1.597036).abs() < 1e-6);
        assert!((1.0 / w.expected_grad_norm_sq - 8.079).abs() < 1e-3);
    }

    #[test]
    fn gm_quadratic_unsupported() {
        assert!(matches!(
            worst_instance(WorstMethod::Gm, Flavor::Quadratic, 3, 1.0, 1.0, 2, None),
            Err(FomError::Unsupported(_))
        ));
    }

    #[test]
    fn bad_direction() {
        let nu = Vector::from_vec(vec![1.0, 1.0]);
        assert!(matches!(
            worst_instance(WorstMethod::Ogmg, Flavor::Huber, 3, 1.0, 1.0, 2, Some(nu)),
            Err(FomError::Parameter(_))
        ));
        let nu = Vector::from_vec(vec![1.0]);
        assert!(worst_instance(WorstMethod::Ogmg, Flavor::Huber, 3, 1.0, 1.0, 2, Some(nu)).is_err());
    }

    #[test]
    fn ifc_equality_everywhere() {
        for (m, f) in [
            (WorstMethod::Gm, Flavor::Huber),
            (WorstMethod::Ogmg, Flavor::Huber),
            (WorstMethod::Ogmg, Flavor::Quadratic),
        ] {
            for n in [1, 2, 7, 30] {
                for (l, r) in [(1.0, 1.0), (2.5, 0.3)] {
                    let w = worst_instance(m, f, n, l, r, 4, None).unwrap();
                    let target = 0.5 * l * r * r;
                    assert!((ifc_gap(&w) - target).abs() <= 1e-12 * target, "{} N={n}", w.label());
                }
            }
        }
    }

    #[test]
    fn gm_huber_exact_and_contained() {
        for n in [1, 3, 5, 20, 50] {
            let w = worst_instance(WorstMethod::Gm, Flavor::Huber, n, 1.0, 1.0, 8, None).unwrap();
            let rep = verify_exact_bound(&w, &tol()).unwrap();
            assert!(rep.pass, "N={n}: {rep:?}");
            assert_eq!(rep.affine_region, Some(true));
            assert!(rep.max_grad_deviation <= 1e-12);
        }
    }

    #[test]
    fn ogmg_flavors_agree() {
        for n in [1, 2, 4, 10, 20, 50] {
            let h = verify_exact_bound(
                &worst_instance(WorstMethod::Ogmg, Flavor::Huber, n, 1.0, 1.0, 8, None).unwrap(),
                &tol(),
            )
            .unwrap();
            let q = verify_exact_bound(
                &worst_instance(WorstMethod::Ogmg, Flavor::Quadratic, n, 1.0, 1.0, 8, None).unwrap(),
                &tol(),
            )
            .unwrap();
            assert!(h.pass && q.pass, "N={n}: {h:?} {q:?}");
            assert!(h.max_grad_deviation <= 1e-12, "N={n}: {}", h.max_grad_deviation);
            assert!((h.measured - q.measured).abs() <= 1e-9 * q.measured);
        }
    }

    #[test]
    fn quadratic_sign_pattern() {
        let n = 9;
        let w = worst_instance(WorstMethod::Ogmg, Flavor::Quadratic, n, 1.0, 1.0, 2, None).unwrap();
        let tr = run_method(Method::Ogmg, &w.instance.oracle, &w.instance.x0, n, None).unwrap();
        let th = theta_sequence(ThetaVariant::OgmgTilde, n).unwrap();
        let t = th.values();
        let r1 = tr.xs[1][0] / tr.xs[0][0];
        assert!((r1 + (2.0 * t[1] - 1.0) / t[0]).abs() < 1e-12);
        for i in 1..n {
            let ratio = tr.xs[i + 1][0] / tr.xs[i][0];
            let want = -(2.0 * t[i + 1] - 1.0) / (2.0 * t[i] - 1.0);
            assert!((ratio - want).abs() <= 1e-10 * want.abs(), "i={i}");
        }
    }

    #[test]
    fn rotated_direction() {
        let nu = Vector::from_vec(vec![0.6, 0.0, -0.8]);
        let w = worst_instance(WorstMethod::Ogmg, Flavor::Huber, 6, 1.0, 1.0, 3, Some(nu)).unwrap();
        assert!(verify_exact_bound(&w, &tol()).unwrap().pass);
    }

    #[test]
    fn distance_ratio_chain() {
        for n in 1..=200 {
            let ratio = ogmg_huber_distance_ratio(n).unwrap();
            let t0 = theta_sequence(ThetaVariant::OgmgTilde, n).unwrap().theta0_sq().sqrt();
            assert!(ratio >= t0 / 2.0);
            assert!(t0 / 2.0 >= (n as f64 + 1.0) / (2.0 * 2f64.sqrt()));
        }
        let w = worst_instance(WorstMethod::Ogmg, Flavor::Huber, 12, 1.0, 1.0, 2, None).unwrap();
        let rbar = (&w.instance.x0 - w.minimizer()).norm();
        assert!((rbar - ogmg_huber_distance_ratio(12).unwrap()).abs() < 1e-14);
    }
}
