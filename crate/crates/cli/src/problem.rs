//! Builtin problem registry and JSON problem files.

use crate::args::ProblemArgs;
use fom_core::oracle::{
    make_instance, radius_from_gap, random_least_squares, random_logistic, random_unit, InstanceKind,
    ProblemDoc, ProblemInstance, Vector,
};
use fom_core::worstcase::{worst_instance, Flavor, WorstMethod};
use fom_core::{FomError, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::Path;

pub const BUILTINS: [&str; 7] = [
    "quadratic",
    "huber",
    "least-squares",
    "logistic",
    "worst:gm-huber",
    "worst:ogmg-huber",
    "worst:ogmg-quadratic",
];

#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub instance: ProblemInstance,
    /// Radius of the initial gap, when `f*` is known.
    pub r: Option<f64>,
}

fn e1(d: usize) -> Vector {
    let mut v = Vector::zeros(d);
    v[0] = 1.0;
    v
}

/// Loads `args.problem`. The worst-case problems depend on `n`.
pub fn load_problem(args: &ProblemArgs, n: usize) -> Result<LoadedProblem> {
    let (l, r, d) = (args.lipschitz, args.r, args.d);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let worst = |m, f| worst_instance(m, f, n, l, r, d, None).map(|w| w.instance);
    let instance = match args.problem.as_str() {
        "quadratic" => {
            let oracle = make_instance(InstanceKind::Quadratic { lipschitz: l }, d)?;
            ProblemInstance::new(oracle, e1(d) * r)?
        }
        "huber" => {
            let r0 = args.r0;
            let oracle = make_instance(InstanceKind::Huber { lipschitz: l, r0 }, d)?;
            let t = if r <= r0 { r } else { (r * r + r0 * r0) / (2.0 * r0) };
            ProblemInstance::new(oracle, e1(d) * t)?
        }
        "least-squares" => {
            let (oracle, x_star) = random_least_squares(2 * d, d, &mut rng)?;
            let u = random_unit(d, &mut rng);
            let unit_gap = oracle.value(&(&x_star + &u));
            let s = r * (0.5 * oracle.lipschitz() / unit_gap).sqrt();
            ProblemInstance::new(oracle, x_star + u * s)?
        }
        "logistic" => {
            let oracle = random_logistic(4 * d, d, &mut rng)?;
            let x0 = random_unit(d, &mut rng) * r;
            ProblemInstance::new(oracle, x0)?
        }
        "worst:gm-huber" => worst(WorstMethod::Gm, Flavor::Huber)?,
        "worst:ogmg-huber" => worst(WorstMethod::Ogmg, Flavor::Huber)?,
        "worst:ogmg-quadratic" => worst(WorstMethod::Ogmg, Flavor::Quadratic)?,
        path => return load_file(Path::new(path)),
    };
    let r = radius_from_gap(&instance.oracle, &instance.x0).ok();
    Ok(LoadedProblem { instance, r })
}

fn load_file(path: &Path) -> Result<LoadedProblem> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        FomError::Parameter(format!(
            "problem `{}` is neither a builtin ({}) nor a readable file: {e}",
            path.display(),
            BUILTINS.join(", ")
        ))
    })?;
    let instance = ProblemDoc::from_json(&text)?.into_instance()?;
    let r = match instance.r {
        Some(r) => Some(r),
        None => radius_from_gap(&instance.oracle, &instance.x0).ok(),
    };
    Ok(LoadedProblem { instance, r })
}
