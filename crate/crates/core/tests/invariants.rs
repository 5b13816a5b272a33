use proptest::prelude::*;
use quadflow::analysis::check_trajectory;
use quadflow::{
    corner_constants, find_direction, solve, Coefficients, IntegratorConfig, QuadrantPoint,
};

fn hypothesis_coefficients() -> impl Strategy<Value = Coefficients> {
    (0.1f64..5.0, -5.0f64..5.0, -5.0f64..5.0, 0.1f64..5.0)
        .prop_filter_map("outside (H)", |(a, b, g, d)| {
            let c = Coefficients::new(a, b, g, d).ok()?;
            c.require_hypothesis().ok().map(|_| c)
        })
}

fn start() -> impl Strategy<Value = QuadrantPoint> {
    prop_oneof![
        Just(QuadrantPoint::CORNER),
        (0.05f64..3.0).prop_map(|y| QuadrantPoint { x: 0.0, y }),
        (0.05f64..3.0).prop_map(|x| QuadrantPoint { x, y: 0.0 }),
        (0.05f64..3.0, 0.05f64..3.0).prop_map(|(x, y)| QuadrantPoint { x, y }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn qualitative_properties(c in hypothesis_coefficients(), u0 in start(), t_end in 0.1f64..5.0) {
        let traj = solve(&c, &u0, t_end, &IntegratorConfig::default()).unwrap();
        for report in check_trajectory(&traj).unwrap() {
            prop_assert!(report.pass, "{}", report);
        }
        for (_, jump) in traj.handoff_jumps() {
            prop_assert!(jump < IntegratorConfig::default().abs_tol);
        }
    }

    #[test]
    fn exchanging_axes_is_a_symmetry(c in hypothesis_coefficients(), u0 in start()) {
        let cfg = IntegratorConfig::default();
        let p = solve(&c, &u0, 1.0, &cfg).unwrap().final_point();
        let q = solve(&c.swapped(), &u0.swapped(), 1.0, &cfg).unwrap().final_point();
        prop_assert!(p.distance(&q.swapped()) < 1e-8 * (1.0 + p.norm()));
    }

    #[test]
    fn corner_solution_is_self_similar(c in hypothesis_coefficients(), t in 0.01f64..4.0) {
        let cc = corner_constants(&c, &find_direction(&c).unwrap()).unwrap();
        let p = solve(&c, &QuadrantPoint::CORNER, t, &IntegratorConfig::default()).unwrap().final_point();
        let exact = cc.at(t);
        prop_assert!(p.distance(&exact) < 1e-8 * exact.norm());
    }
}
