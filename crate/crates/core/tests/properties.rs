use fom_core::certificate::{assemble_s, dual_certificate, verify_certificate, CertMethod, DualCertificate};
use fom_core::engine::{run_fsfom, run_method, Method};
use fom_core::oracle::{radius_from_gap, random_gaussian, random_least_squares, random_unit};
use fom_core::schedule::{theta_sequence, ThetaVariant};
use fom_core::stepmatrix::{step_schedule, StepMethod, StepSchedule, TriangleDoc};
use fom_core::tolerance::Tolerances;
use fom_core::worstcase::{verify_exact_bound, worst_instance, Flavor, WorstMethod};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn triangle(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=n).map(|r| prop::collection::vec(-3.0f64..3.0, r)).collect::<Vec<_>>()
}

fn custom_case() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>, f64, f64)> {
    (1usize..=50).prop_flat_map(|n| {
        (
            triangle(n),
            prop::collection::vec(0.0f64..2.0, n),
            prop::collection::vec(0.0f64..2.0, n),
            0.0f64..2.0,
            0.0f64..2.0,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn both_constructions_of_s_agree((rows, a, b, c, e) in custom_case()) {
        let h = StepSchedule::from_rows(StepMethod::Custom, &rows).unwrap();
        let cert = DualCertificate::new(a, b, c, e).unwrap();
        let s = assemble_s(&h, &cert);
        prop_assert!(s.is_ok(), "{:?}", s.err());
    }

    #[test]
    fn momentum_forms_match_triangles(seed in any::<u64>(), n in 1usize..25, d in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (oracle, _) = random_least_squares(d + 3, d, &mut rng).unwrap();
        let x0 = random_gaussian(d, 1.0, &mut rng);
        for (step, method) in [(StepMethod::Gm, Method::Gm), (StepMethod::Ogm, Method::Ogm), (StepMethod::Ogmg, Method::Ogmg)] {
            let a = run_fsfom(&oracle, &x0, &step_schedule(step, n).unwrap()).unwrap();
            let b = run_method(method, &oracle, &x0, n, None).unwrap();
            prop_assert!(b.max_iterate_deviation(&a) <= 1e-9);
        }
    }

    #[test]
    fn ogmg_gradient_bound_holds(seed in any::<u64>(), n in 1usize..40, d in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (oracle, x_star) = random_least_squares(2 * d, d, &mut rng).unwrap();
        let x0 = &x_star + random_gaussian(d, 2.0, &mut rng);
        let r = radius_from_gap(&oracle, &x0).unwrap();
        let l = oracle.lipschitz();
        let bound = l * l * r * r / theta_sequence(ThetaVariant::OgmgTilde, n).unwrap().theta0_sq();
        let g = run_method(Method::Ogmg, &oracle, &x0, n, None).unwrap().last_grad().norm_squared();
        prop_assert!(g <= bound * (1.0 + 1e-8), "{g} > {bound}");
    }

    #[test]
    fn worst_case_is_rotation_invariant(seed in any::<u64>(), n in 1usize..30, d in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tol = Tolerances::default();
        for (m, f) in [(WorstMethod::Gm, Flavor::Huber), (WorstMethod::Ogmg, Flavor::Huber), (WorstMethod::Ogmg, Flavor::Quadratic)] {
            let nu = random_unit(d, &mut rng);
            let w = worst_instance(m, f, n, 1.0, 1.0, d, Some(nu)).unwrap();
            let rep = verify_exact_bound(&w, &tol).unwrap();
            prop_assert!(rep.pass, "{rep:?}");
        }
    }

    #[test]
    fn triangle_json_round_trip(n in 1usize..40) {
        for m in [StepMethod::Gm, StepMethod::Ogm, StepMethod::Ogmg, StepMethod::OgmgAlt] {
            let s = step_schedule(m, n).unwrap();
            let text = serde_json::to_string(&TriangleDoc::from_schedule(&s)).unwrap();
            let back = serde_json::from_str::<TriangleDoc>(&text).unwrap().into_schedule().unwrap();
            prop_assert_eq!(back, s);
        }
    }
}

#[test]
fn perturbed_certificates_are_rejected() {
    let tol = Tolerances::default();
    for n in [2, 5, 17] {
        let h = step_schedule(StepMethod::Ogmg, n).unwrap();
        let good = dual_certificate(CertMethod::Ogmg, n).unwrap();
        assert!(verify_certificate(&h, &good, &tol).unwrap().feasible);
        let mut bad = good.clone();
        bad.e *= 1.0 - 1e-6;
        assert!(!verify_certificate(&h, &bad, &tol).unwrap().feasible);
        let mut bad = good.clone();
        bad.a[n / 2] *= 1.01;
        assert!(!verify_certificate(&h, &bad, &tol).unwrap().feasible);
    }
}

#[test]
fn gm_certificate_does_not_certify_ogmg() {
    let tol = Tolerances::default();
    let h = step_schedule(StepMethod::Ogmg, 6).unwrap();
    let rep = verify_certificate(&h, &dual_certificate(CertMethod::Gm, 6).unwrap(), &tol).unwrap();
    assert!(!rep.psd);
}

#[test]
fn certificate_json_round_trip() {
    let c = dual_certificate(CertMethod::Ogmg, 9).unwrap();
    let text = serde_json::to_string(&c).unwrap();
    assert_eq!(serde_json::from_str::<DualCertificate>(&text).unwrap(), c);
}
