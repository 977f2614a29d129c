//! Smooth convex test functions.
//!
//! A [`SmoothOracle`] evaluates `f` and its gradient and carries the declared
//! Lipschitz constant of the gradient plus, when known analytically, the
//! optimal value `f*`. Oracles are immutable once built and can be shared
//! across threads.

use crate::error::{FomError, Result};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub type Vector = DVector<f64>;

/// Relative tolerance used when checking oracle-level invariants.
pub const PROBE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
enum Objective {
    /// `(L/2)||x||^2`
    Quadratic,
    /// `L r0 ||x|| - L r0^2 / 2` outside the ball of radius `r0`, quadratic inside.
    Huber { r0: f64 },
    /// `0.5 ||A x - b||^2`
    LeastSquares { a: DMatrix<f64>, b: Vector },
    /// `(1/m) sum_i log(1 + exp(-y_i a_i^T x))`
    Logistic { a: DMatrix<f64>, labels: Vector },
}

/// An L-smooth convex function on `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothOracle {
    dim: usize,
    lipschitz: f64,
    f_star: Option<f64>,
    objective: Objective,
}

/// What [`make_instance`] should build.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceKind {
    Quadratic { lipschitz: f64 },
    Huber { lipschitz: f64, r0: f64 },
    /// `f*` is only known when the caller declares it (e.g. a consistent system has `f* = 0`).
    LeastSquares { a: DMatrix<f64>, b: Vector, f_star: Option<f64> },
    /// Labels must be `+1` or `-1`.
    Logistic { a: DMatrix<f64>, labels: Vector },
}

pub fn make_instance(kind: InstanceKind, d: usize) -> Result<SmoothOracle> {
    if d == 0 {
        return Err(FomError::Parameter("dimension d must be at least 1".into()));
    }
    match kind {
        InstanceKind::Quadratic { lipschitz } => {
            check_positive("L", lipschitz)?;
            Ok(SmoothOracle {
                dim: d,
                lipschitz,
                f_star: Some(0.0),
                objective: Objective::Quadratic,
            })
        }
        InstanceKind::Huber { lipschitz, r0 } => {
            check_positive("L", lipschitz)?;
            check_positive("r0", r0)?;
            Ok(SmoothOracle {
                dim: d,
                lipschitz,
                f_star: Some(0.0),
                objective: Objective::Huber { r0 },
            })
        }
        InstanceKind::LeastSquares { a, b, f_star } => {
            check_data(&a, b.len(), d)?;
            let lipschitz = gram_spectral_bound(&a)?;
            if let Some(fs) = f_star {
                if !fs.is_finite() {
                    return Err(FomError::Parameter("declared f* must be finite".into()));
                }
            }
            Ok(SmoothOracle {
                dim: d,
                lipschitz,
                f_star,
                objective: Objective::LeastSquares { a, b },
            })
        }
        InstanceKind::Logistic { a, labels } => {
            check_data(&a, labels.len(), d)?;
            if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
                return Err(FomError::Data("logistic labels must be +1 or -1".into()));
            }
            let m = a.nrows() as f64;
            let lipschitz = gram_spectral_bound(&a)? / (4.0 * m);
            Ok(SmoothOracle {
                dim: d,
                lipschitz,
                f_star: None,
                objective: Objective::Logistic { a, labels },
            })
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(FomError::Parameter(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_data(a: &DMatrix<f64>, rhs_len: usize, d: usize) -> Result<()> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(FomError::Data("data matrix is empty".into()));
    }
    if a.ncols() != d {
        return Err(FomError::Parameter(format!(
            "data matrix has {} columns but d = {d}",
            a.ncols()
        )));
    }
    if rhs_len != a.nrows() {
        return Err(FomError::Data(format!(
            "data matrix has {} rows but {rhs_len} targets",
            a.nrows()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(FomError::Data("data matrix has non-finite entries".into()));
    }
    Ok(())
}

/// Largest eigenvalue of `A^T A`, i.e. the squared spectral norm of `A`.
fn gram_spectral_bound(a: &DMatrix<f64>) -> Result<f64> {
    let gram = a.transpose() * a;
    let lmax = gram.symmetric_eigenvalues().max();
    if lmax > 0.0 && lmax.is_finite() {
        Ok(lmax)
    } else {
        Err(FomError::Data("data matrix has zero spectral norm".into()))
    }
}

impl SmoothOracle {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn f_star(&self) -> Option<f64> {
        self.f_star
    }

    /// The Huber radius, for Huber oracles.
    pub fn huber_radius(&self) -> Option<f64> {
        match self.objective {
            Objective::Huber { r0 } => Some(r0),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.objective {
            Objective::Quadratic => "quadratic",
            Objective::Huber { .. } => "huber",
            Objective::LeastSquares { .. } => "least_squares",
            Objective::Logistic { .. } => "logistic",
        }
    }

    pub fn value(&self, x: &Vector) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let l = self.lipschitz;
        match &self.objective {
            Objective::Quadratic => 0.5 * l * x.norm_squared(),
            Objective::Huber { r0 } => {
                let nx = x.norm();
                if nx >= *r0 {
                    l * r0 * nx - 0.5 * l * r0 * r0
                } else {
                    0.5 * l * nx * nx
                }
            }
            Objective::LeastSquares { a, b } => 0.5 * (a * x - b).norm_squared(),
            Objective::Logistic { a, labels } => {
                let margins = a * x;
                let m = labels.len() as f64;
                margins
                    .iter()
                    .zip(labels.iter())
                    .map(|(z, y)| softplus(-y * z))
                    .sum::<f64>()
                    / m
            }
        }
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        debug_assert_eq!(x.len(), self.dim);
        let l = self.lipschitz;
        match &self.objective {
            Objective::Quadratic => x * l,
            Objective::Huber { r0 } => {
                let nx = x.norm();
                if nx >= *r0 {
                    x * (l * r0 / nx)
                } else {
                    x * l
                }
            }
            Objective::LeastSquares { a, b } => a.tr_mul(&(a * x - b)),
            Objective::Logistic { a, labels } => {
                let margins = a * x;
                let m = labels.len() as f64;
                // d/dz log(1 + exp(-y z)) = -y * sigmoid(-y z)
                let w = Vector::from_iterator(
                    labels.len(),
                    margins.iter().zip(labels.iter()).map(|(z, y)| -y * sigmoid(-y * z) / m),
                );
                a.tr_mul(&w)
            }
        }
    }
}

fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Tightest `R` with `f(x0) - f* = L R^2 / 2`.
pub fn radius_from_gap(oracle: &SmoothOracle, x0: &Vector) -> Result<f64> {
    let f_star = oracle
        .f_star
        .ok_or_else(|| FomError::Unsupported(format!("{} oracle does not declare f*", oracle.kind_name())))?;
    check_dim(oracle, x0)?;
    let fx = oracle.value(x0);
    let gap = fx - f_star;
    let slack = 1e-12 * (1.0 + fx.abs() + f_star.abs());
    if gap < -slack {
        return Err(FomError::OracleInconsistency { gap });
    }
    Ok((2.0 * gap.max(0.0) / oracle.lipschitz).sqrt())
}

pub(crate) fn check_dim(oracle: &SmoothOracle, x: &Vector) -> Result<()> {
    if x.len() != oracle.dim {
        Err(FomError::Parameter(format!(
            "vector has dimension {} but the oracle expects {}",
            x.len(),
            oracle.dim
        )))
    } else {
        Ok(())
    }
}

/// An oracle with a starting point and the constants of the two initial
/// conditions: `R` bounds the initial gap, `Rbar` the initial distance.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub oracle: SmoothOracle,
    pub x0: Vector,
    pub r: Option<f64>,
    pub rbar: Option<f64>,
}

impl ProblemInstance {
    pub fn new(oracle: SmoothOracle, x0: Vector) -> Result<Self> {
        check_dim(&oracle, &x0)?;
        Ok(Self {
            oracle,
            x0,
            r: None,
            rbar: None,
        })
    }

    pub fn with_r(mut self, r: f64) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(FomError::Parameter(format!("R must be nonnegative, got {r}")));
        }
        self.r = Some(r);
        Ok(self)
    }

    pub fn with_rbar(mut self, rbar: f64) -> Result<Self> {
        if !(rbar >= 0.0 && rbar.is_finite()) {
            return Err(FomError::Parameter(format!("Rbar must be nonnegative, got {rbar}")));
        }
        self.rbar = Some(rbar);
        Ok(self)
    }

    /// Checks the initial conditions that can be checked: the gap bound when
    /// `R` and `f*` are known and the distance bound when a minimizer is given.
    pub fn check_initial_conditions(&self, minimizer: Option<&Vector>) -> Result<()> {
        let l = self.oracle.lipschitz;
        if let (Some(r), Some(fs)) = (self.r, self.oracle.f_star) {
            let gap = self.oracle.value(&self.x0) - fs;
            let bound = 0.5 * l * r * r;
            if gap > bound + 1e-12 * (1.0 + bound) {
                return Err(FomError::Contract(format!(
                    "f(x0) - f* = {gap:e} exceeds L R^2 / 2 = {bound:e}"
                )));
            }
        }
        if let (Some(rbar), Some(xs)) = (self.rbar, minimizer) {
            check_dim(&self.oracle, xs)?;
            let dist = (&self.x0 - xs).norm();
            if dist > rbar * (1.0 + 1e-12) + 1e-300 {
                return Err(FomError::Contract(format!("||x0 - x*|| = {dist:e} exceeds Rbar = {rbar:e}")));
            }
        }
        Ok(())
    }
}

/// JSON form of a problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    /// One of `quadratic`, `huber`, `least_squares`, `logistic`.
    pub kind: String,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataDoc>,
    pub x0: Vec<f64>,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_star: Option<f64>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(rename = "Rbar", default, skip_serializing_if = "Option::is_none")]
    pub rbar: Option<f64>,
}

/// Row-major data matrix `a` and its targets (`b` for least squares,
/// labels for logistic regression).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataDoc {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl DataDoc {
    fn matrix(&self) -> Result<(DMatrix<f64>, Vector)> {
        let rows = self.a.len();
        let cols = self.a.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(FomError::Data("data matrix is empty".into()));
        }
        if self.a.iter().any(|r| r.len() != cols) {
            return Err(FomError::Data("data matrix rows have different lengths".into()));
        }
        let a = DMatrix::from_fn(rows, cols, |i, j| self.a[i][j]);
        Ok((a, Vector::from_vec(self.b.clone())))
    }
}

impl ProblemDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn into_instance(self) -> Result<ProblemInstance> {
        let need_l = || {
            self.lipschitz
                .ok_or_else(|| FomError::Parameter(format!("kind `{}` requires field L", self.kind)))
        };
        let need_data = || {
            self.data
                .as_ref()
                .ok_or_else(|| FomError::Data(format!("kind `{}` requires field data", self.kind)))
                .and_then(DataDoc::matrix)
        };
        let kind = match self.kind.as_str() {
            "quadratic" => InstanceKind::Quadratic { lipschitz: need_l()? },
            "huber" => InstanceKind::Huber {
                lipschitz: need_l()?,
                r0: self
                    .r0
                    .ok_or_else(|| FomError::Parameter("kind `huber` requires field r0".into()))?,
            },
            "least_squares" => {
                let (a, b) = need_data()?;
                InstanceKind::LeastSquares { a, b, f_star: self.f_star }
            }
            "logistic" => {
                let (a, labels) = need_data()?;
                InstanceKind::Logistic { a, labels }
            }
            other => return Err(FomError::Parameter(format!("unknown problem kind `{other}`"))),
        };
        let oracle = make_instance(kind, self.d)?;
        let mut inst = ProblemInstance::new(oracle, Vector::from_vec(self.x0))?;
        if let Some(r) = self.r {
            inst = inst.with_r(r)?;
        }
        if let Some(rbar) = self.rbar {
            inst = inst.with_rbar(rbar)?;
        }
        inst.check_initial_conditions(None)?;
        Ok(inst)
    }
}

/// Uniformly random unit vector in `R^d`.
pub fn random_unit<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vector {
    loop {
        let v = Vector::from_fn(d, |_, _| rng.sample(StandardNormal));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// Uniform sample from the ball of the given radius.
pub fn random_in_ball<R: Rng + ?Sized>(d: usize, radius: f64, rng: &mut R) -> Vector {
    let u: f64 = rng.random();
    random_unit(d, rng) * (radius * u.powf(1.0 / d as f64))
}

/// Gaussian vector with standard deviation `scale` per entry.
pub fn random_gaussian<R: Rng + ?Sized>(d: usize, scale: f64, rng: &mut R) -> Vector {
    Vector::from_fn(d, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

/// Consistent least-squares problem `b = A x*` with Gaussian `A` of size
/// `m x d`, `m >= d`. Returns the oracle (with `f* = 0`) and `x*`.
pub fn random_least_squares<R: Rng + ?Sized>(m: usize, d: usize, rng: &mut R) -> Result<(SmoothOracle, Vector)> {
    if m < d {
        return Err(FomError::Parameter(format!("need m >= d for a unique minimizer, got m={m} d={d}")));
    }
    let a = DMatrix::from_fn(m, d, |_, _| rng.sample::<f64, _>(StandardNormal) / (m as f64).sqrt());
    let x_star = random_gaussian(d, 1.0, rng);
    let b = &a * &x_star;
    let oracle = make_instance(
        InstanceKind::LeastSquares {
            a,
            b,
            f_star: Some(0.0),
        },
        d,
    )?;
    Ok((oracle, x_star))
}

/// Logistic regression on Gaussian features with noisy linear labels.
pub fn random_logistic<R: Rng + ?Sized>(m: usize, d: usize, rng: &mut R) -> Result<SmoothOracle> {
    let a = DMatrix::from_fn(m, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let w = random_gaussian(d, 1.0, rng);
    let scores = &a * &w;
    let labels = Vector::from_iterator(
        m,
        scores.iter().map(|s| {
            let noise: f64 = rng.sample(StandardNormal);
            if s + 0.5 * noise >= 0.0 {
                1.0
            } else {
                -1.0
            }
        }),
    );
    make_instance(InstanceKind::Logistic { a, labels }, d)
}

/// Worst observed slack of the smoothness inequalities over random pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothnessProbe {
    pub pairs: usize,
    /// min over pairs of `(L||x-y|| - ||g(x)-g(y)||) / (L||x-y||)`.
    pub lipschitz_slack: f64,
    /// min over pairs of the cocoercivity gap, relative to the magnitudes involved.
    pub cocoercivity_slack: f64,
    /// min over probes of `f(x) - f*`, when `f*` is declared.
    pub min_gap: Option<f64>,
}

impl SmoothnessProbe {
    pub fn holds(&self, tol: f64) -> bool {
        self.lipschitz_slack >= -tol
            && self.cocoercivity_slack >= -tol
            && self.min_gap.is_none_or(|g| g >= -tol)
    }
}

/// Samples `pairs` point pairs uniformly in a ball of `radius` and measures
/// the Lipschitz, cocoercivity and optimal-value inequalities.
pub fn probe_smoothness<R: Rng + ?Sized>(
    oracle: &SmoothOracle,
    pairs: usize,
    radius: f64,
    rng: &mut R,
) -> SmoothnessProbe {
    let l = oracle.lipschitz;
    let mut lip = f64::INFINITY;
    let mut coco = f64::INFINITY;
    let mut min_gap: Option<f64> = None;
    for _ in 0..pairs {
        let x = random_in_ball(oracle.dim, radius, rng);
        let y = random_in_ball(oracle.dim, radius, rng);
        let (fx, fy) = (oracle.value(&x), oracle.value(&y));
        let (gx, gy) = (oracle.gradient(&x), oracle.gradient(&y));
        let dx = &x - &y;
        let dg = &gx - &gy;
        let step = l * dx.norm();
        if step > 0.0 {
            lip = lip.min((step - dg.norm()) / step);
        }
        let inner = gy.dot(&dx);
        let lhs = fx - fy - inner;
        let rhs = dg.norm_squared() / (2.0 * l);
        let scale = fx.abs() + fy.abs() + inner.abs() + rhs + f64::MIN_POSITIVE;
        coco = coco.min((lhs - rhs) / scale);
        if let Some(fs) = oracle.f_star {
            let g = (fx.min(fy) - fs) / (1.0 + fs.abs());
            min_gap = Some(min_gap.map_or(g, |m: f64| m.min(g)));
        }
    }
    SmoothnessProbe {
        pairs,
        lipschitz_slack: lip,
        cocoercivity_slack: coco,
        min_gap,
    }
}
