use farkas_core::sampling::{self, Regime};
use farkas_core::{
    certificate_verify, dual_objective, primal_objective, solve, Cone, GeneratorSet, SolverConfig, Vector, Verdict,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn v(x: &[f64]) -> Vector {
    Vector::from_slice(x).unwrap()
}

fn regime() -> impl Strategy<Value = Regime> {
    prop_oneof![Just(Regime::Feasible), Just(Regime::Boundary), Just(Regime::Infeasible)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moreau_parts_are_orthogonal_and_in_their_cones(
        x in proptest::collection::vec(-5.0f64..5.0, 2..9),
        alpha in 0.2f64..4.0,
        soc in any::<bool>(),
    ) {
        let n = x.len();
        let cone = if soc { Cone::second_order(n, alpha).unwrap() } else { Cone::orthant(n) };
        let x = v(&x);
        let (p, q) = cone.moreau_decompose(&x).unwrap();
        prop_assert!(x.distance(&p.add(&q)) <= 1e-10 * (1.0 + x.norm()));
        prop_assert!(p.dot(&q).abs() <= 1e-8 * (1.0 + x.norm() * x.norm()));
        prop_assert!(cone.contains(&p, 1e-9).unwrap());
        prop_assert!(cone.polar_contains(&q, 1e-9).unwrap());
    }

    #[test]
    fn weak_duality_against_the_planted_point(seed in any::<u64>(), eps in prop_oneof![Just(0.0), Just(0.1)]) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = sampling::sample(&mut rng, Regime::Feasible, 4, 5, eps).unwrap();
        let f = primal_objective(&s.instance, &s.x0).unwrap();
        prop_assert!(f.is_finite());
        for _ in 0..8 {
            let y = sampling::random_vector(&mut rng, s.instance.a().rows()).scale(3.0);
            prop_assert!(f + dual_objective(&s.instance, &y).unwrap() >= -1e-9);
        }
    }

    #[test]
    fn outcomes_never_hold_both_alternatives(seed in any::<u64>(), regime in regime(), eps in prop_oneof![Just(0.0), Just(0.1)]) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = sampling::sample(&mut rng, regime, 3, 4, eps).unwrap();
        let cfg = SolverConfig::default();
        let inst = &s.instance;
        let out = solve(inst, &cfg).unwrap();
        let certified = out.certificate.iter().chain(s.certificate.iter())
            .any(|c| certificate_verify(inst, c, cfg.cert_tol).unwrap());
        if out.verdict == Verdict::Feasible {
            let x = out.x.unwrap();
            prop_assert!(inst.residual(&x).unwrap() <= eps + cfg.verify_tol);
            prop_assert!(!certified);
        }
        if let Some(c) = &out.certificate {
            prop_assert!(certificate_verify(inst, c, cfg.cert_tol).unwrap());
        }
    }

    #[test]
    fn solutions_scale_with_the_target(seed in any::<u64>(), t in 0.25f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = sampling::sample(&mut rng, Regime::Feasible, 4, 5, 0.1).unwrap();
        let cfg = SolverConfig::default();
        let inst = &s.instance;
        let scaled = inst.with_target(inst.b().scale(t), 0.1 * t).unwrap();
        let (p, q) = (solve(inst, &cfg).unwrap(), solve(&scaled, &cfg).unwrap());
        prop_assert_eq!(p.verdict, Verdict::Feasible);
        prop_assert_eq!(q.verdict, Verdict::Feasible);
        let (x, xt) = (p.x.unwrap(), q.x.unwrap());
        prop_assert!(xt.distance(&x.scale(t)) <= 1e-5 * (1.0 + xt.norm()));
    }

    #[test]
    fn certificates_are_scale_free(seed in any::<u64>(), c in 1e-3f64..1e3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = sampling::sample(&mut rng, Regime::Infeasible, 4, 5, 0.0).unwrap();
        let y = s.certificate.unwrap();
        prop_assert!(certificate_verify(&s.instance, &y, 1e-8).unwrap());
        prop_assert!(certificate_verify(&s.instance, &y.scale(c), 1e-8).unwrap());
        prop_assert!(!certificate_verify(&s.instance, &y.scale(-c), 1e-8).unwrap());
    }

    #[test]
    fn support_and_gauge_satisfy_fenchel_young(
        pts in proptest::collection::vec(proptest::collection::vec(0.05f64..2.0, 3), 1..5),
        upper in proptest::collection::vec(0.1f64..3.0, 3),
        z in proptest::collection::vec(-3.0f64..3.0, 3),
        w in proptest::collection::vec(0.0f64..3.0, 3),
    ) {
        let points: Vec<Vector> = pts.iter().map(|p| v(p)).collect();
        let (z, w) = (v(&z), v(&w));
        for k in [GeneratorSet::polytope(points).unwrap(), GeneratorSet::boxed(v(&upper)).unwrap()] {
            let sigma = k.support_value(&z).unwrap();
            let j = k.gauge(&w).unwrap();
            if j.is_finite() {
                prop_assert!(z.dot(&w) <= sigma * j + 1e-9 * (1.0 + w.norm() * z.norm()));
            }
        }
    }
}
