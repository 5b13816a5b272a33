use super::*;
use crate::system::{corner_constants, find_direction};

fn co(a: f64, b: f64, g: f64, d: f64) -> Coefficients {
    Coefficients::new(a, b, g, d).unwrap()
}

fn pt(x: f64, y: f64) -> QuadrantPoint {
    QuadrantPoint::new(x, y).unwrap()
}

fn cfg() -> IntegratorConfig {
    IntegratorConfig::default()
}

fn assert_close(p: QuadrantPoint, x: f64, y: f64, tol: f64) {
    assert!(
        (p.x - x).abs() <= tol * x.abs().max(1.0) && (p.y - y).abs() <= tol * y.abs().max(1.0),
        "got ({}, {}), expected ({x}, {y})",
        p.x,
        p.y
    );
}

#[test]
fn solve_examples() {
    let c = co(1.0, 0.0, 0.0, 1.0);
    let t = solve(&c, &QuadrantPoint::CORNER, 2.0, &cfg()).unwrap();
    assert_close(t.final_point(), 2.0, 2.0, 1e-9);

    let t = solve(&c, &pt(1.0, 1.0), 4.0, &cfg()).unwrap();
    assert_close(t.final_point(), 3.0, 3.0, 1e-9);

    let t = solve(&c, &pt(0.0, 1.0), 4.0, &cfg()).unwrap();
    assert_close(t.final_point(), 8f64.sqrt(), 3.0, 1e-9);
}

#[test]
fn solve_dispatches_by_start() {
    let c = co(1.0, 0.5, 0.2, 1.0);
    let corner = solve(&c, &QuadrantPoint::CORNER, 1.0, &cfg()).unwrap();
    assert_eq!(corner.regime_at(0.0), Regime::ClosedFormCorner);
    assert_eq!(corner.regime_at(1.0), Regime::Interior);

    let edge = solve(&c, &pt(0.0, 1.0), 1.0, &cfg()).unwrap();
    assert_eq!(edge.regime_at(0.0), Regime::EdgeTransformed);

    let other_edge = solve(&c, &pt(1.0, 0.0), 1.0, &cfg()).unwrap();
    assert_eq!(other_edge.regime_at(0.0), Regime::EdgeTransformed);
    assert_eq!(other_edge.initial_point(), pt(1.0, 0.0));
    assert_eq!(other_edge.coefficients(), &c);

    let interior = solve(&c, &pt(1.0, 1.0), 1.0, &cfg()).unwrap();
    assert!(interior.handoff_times().is_empty());
}

#[test]
fn x_axis_start_uses_swapped_edge() {
    let c = co(1.0, 0.0, 0.0, 1.0);
    let t = solve(&c, &pt(1.0, 0.0), 4.0, &cfg()).unwrap();
    assert_close(t.final_point(), 3.0, 8f64.sqrt(), 1e-9);
    for s in [0.01f64, 0.5, 2.0] {
        let p = t.evaluate(s).unwrap();
        assert_close(p, (1.0 + 2.0 * s).sqrt(), (2.0 * s).sqrt(), 1e-8);
    }
}

#[test]
fn interior_examples() {
    let c = co(1.0, 1.0, 1.0, 1.0);
    let t = solve_interior(&c, &pt(1.0, 1.0), 3.0, &cfg()).unwrap();
    for s in [0.0f64, 0.3, 1.0, 3.0] {
        let r = (1.0 + 4.0 * s).sqrt();
        assert_close(t.evaluate(s).unwrap(), r, r, 1e-9);
    }

    let c = co(2.0, 1.0, 0.0, 1.0);
    let cc = corner_constants(&c, &find_direction(&c).unwrap()).unwrap();
    let t = solve_interior(&c, &pt(0.3 * cc.c, 0.3 * cc.d), 5.0, &cfg()).unwrap();
    for s in t.samples() {
        assert!((s.point.y / s.point.x - 0.5).abs() < 1e-10);
    }

    let c = co(1.0, 0.0, 0.0, 1.0);
    // x = sqrt(4 + 2t), y = sqrt(1 + 2t)
    let t = solve_interior(&c, &pt(2.0, 1.0), 1.5, &cfg()).unwrap();
    assert_close(t.final_point(), 7f64.sqrt(), 2.0, 1e-9);

    assert!(solve_interior(&c, &pt(0.0, 1.0), 1.0, &cfg()).is_err());
}

#[test]
fn edge_examples() {
    let c = co(1.0, 0.0, 0.0, 1.0);
    let t = solve_edge(&c, &pt(0.0, 1.0), 2.0, &cfg()).unwrap();
    for s in [0.0f64, 1e-4, 0.1, 1.0, 2.0] {
        assert_close(
            t.evaluate(s).unwrap(),
            (2.0 * s).sqrt(),
            (1.0 + 2.0 * s).sqrt(),
            1e-8,
        );
    }

    // alpha delta = beta gamma: z = alpha y - gamma x is conserved, y = x + 1
    let c = co(1.0, 1.0, 1.0, 1.0);
    let t = solve_edge(&c, &pt(0.0, 1.0), 2.0, &cfg()).unwrap();
    for s in t.samples() {
        assert!((s.point.y - s.point.x - 1.0).abs() < 1e-10, "{s:?}");
    }

    assert!(solve_edge(&c, &pt(1.0, 1.0), 1.0, &cfg()).is_err());
}

#[test]
fn edge_hands_off_to_interior() {
    let c = co(1.0, -0.5, 0.8, 2.0);
    let t = solve_edge(&c, &pt(0.0, 1.0), 5.0, &cfg()).unwrap();
    assert_eq!(t.regime_at(5.0), Regime::Interior);
    for (_, jump) in t.handoff_jumps() {
        assert!(jump < cfg().abs_tol);
    }
    for s in t.samples().iter().filter(|s| s.t > 0.0) {
        assert!(s.point.is_interior());
    }
}

#[test]
fn corner_examples() {
    let c = co(1.0, 0.0, 0.0, 1.0);
    let t = solve_corner(&c, 2.0, &cfg()).unwrap();
    assert_close(t.evaluate(2.0).unwrap(), 2.0, 2.0, 1e-9);
    assert_eq!(t.evaluate(0.0).unwrap(), QuadrantPoint::CORNER);

    let c = co(1.0, 1.0, 1.0, 1.0);
    let t = solve_corner(&c, 1.0, &cfg()).unwrap();
    assert_close(t.evaluate(0.25).unwrap(), 1.0, 1.0, 1e-9);

    let cc = corner_constants(&c, &find_direction(&c).unwrap()).unwrap();
    assert_eq!(evaluate_closed_form(&cc, 0.25).unwrap(), pt(1.0, 1.0));
    assert_eq!(
        evaluate_closed_form(&cc, 0.0).unwrap(),
        QuadrantPoint::CORNER
    );
    assert!(evaluate_closed_form(&cc, -1.0).is_err());

    // closed-form segment is exact
    let t0 = cfg().corner_handoff_time;
    assert_eq!(t.evaluate(t0 / 3.0).unwrap(), cc.at(t0 / 3.0));
}

#[test]
fn hitting_time_examples() {
    let c = co(1.0, 0.0, 0.0, 1.0);
    let dir = find_direction(&c).unwrap();
    let tau = hitting_time(&c, &QuadrantPoint::CORNER, 2.0, &dir, &cfg()).unwrap();
    assert!((tau - 0.5).abs() < 1e-10, "tau = {tau}");
    assert!(tau <= dir.hitting_time_bound(&c, 2.0));
    assert_eq!(dir.hitting_time_bound(&c, 2.0), 1.0);

    assert_eq!(
        hitting_time(&c, &pt(1.0, 1.0), 2.0, &dir, &cfg()).unwrap(),
        0.0
    );
    assert!(matches!(
        hitting_time(&c, &pt(2.0, 1.0), 2.0, &dir, &cfg()),
        Err(Error::Precondition(_))
    ));

    // from (1, 0): x = sqrt(1 + 2t), y = sqrt(2t) hit x + y = 2 at t = 9/32
    let (tau, p) = first_hit(&c, &pt(1.0, 0.0), 2.0, &dir, &cfg()).unwrap();
    assert!((tau - 9.0 / 32.0).abs() < 1e-9, "tau = {tau}");
    assert_close(p, 1.25, 0.75, 1e-9);
}

#[test]
fn hitting_time_interior_start() {
    // on the ray y = x with alpha = ... = 1: x = sqrt(x0^2 + 4t)
    let c = co(1.0, 1.0, 1.0, 1.0);
    let dir = find_direction(&c).unwrap();
    let tau = hitting_time(&c, &pt(0.5, 0.5), 4.0, &dir, &cfg()).unwrap();
    assert!((tau - (4.0 - 0.25) / 4.0).abs() < 1e-10, "tau = {tau}");
}

#[test]
fn reference_examples() {
    let c = co(1.0, 0.0, 0.0, 1.0);
    let t = reference_solve(&c, &pt(1.0, 1.0), 4.0, &cfg()).unwrap();
    assert_close(t.final_point(), 3.0, 3.0, 1e-9);

    let t = reference_solve(&c, &pt(0.0, 1.0), 1.0, &cfg()).unwrap();
    assert_close(t.final_point(), 2f64.sqrt(), 3f64.sqrt(), 1e-8);
}

#[test]
fn reference_is_fourth_order() {
    let c = co(1.0, 0.0, 0.0, 1.0);
    let err = |h: f64| {
        let config = IntegratorConfig {
            oracle_step: h,
            ..cfg()
        };
        let p = reference_solve(&c, &pt(1.0, 1.0), 4.0, &config)
            .unwrap()
            .final_point();
        (p.x - 3.0).abs()
    };
    let ratio = err(0.2) / err(0.1);
    assert!((ratio - 16.0).abs() < 1.5, "ratio {ratio}");
}

#[test]
fn reference_agrees_with_adaptive() {
    let c = co(1.5, -0.7, 2.0, 0.9);
    let u0 = pt(0.8, 1.3);
    let a = solve(&c, &u0, 1.0, &cfg()).unwrap();
    let r = reference_solve(&c, &u0, 1.0, &cfg()).unwrap();
    for k in 0..=20 {
        let t = k as f64 / 20.0;
        let d = a.evaluate(t).unwrap().distance(&r.evaluate(t).unwrap());
        assert!(d < 10.0 * cfg().rel_tol, "t = {t}: {d:e}");
    }
}

#[test]
fn fixed_step_runs_outside_hypothesis() {
    let c = co(1.0, -1.0, -1.0, 1.0);
    let path = fixed_step_interior(&c, &pt(0.5, 2.0), 2.0, 1e-4).unwrap();
    for s in &path {
        assert!((s.point.x + s.point.y - 2.5).abs() < 1e-12);
    }
}

#[test]
fn rejects_off_hypothesis_and_bad_inputs() {
    let c = co(1.0, -2.0, -1.0, 1.0);
    assert!(matches!(
        solve(&c, &pt(1.0, 1.0), 1.0, &cfg()),
        Err(Error::Classification(_))
    ));
    let c = co(1.0, 0.0, 0.0, 1.0);
    assert!(solve(&c, &pt(1.0, 1.0), 0.0, &cfg()).is_err());
    let bad = IntegratorConfig {
        epsilon_fraction: 1.0,
        ..cfg()
    };
    assert!(solve(&c, &pt(1.0, 1.0), 1.0, &bad).is_err());
}

#[test]
fn evaluate_outside_interval_fails() {
    let c = co(1.0, 0.0, 0.0, 1.0);
    let t = solve(&c, &pt(1.0, 1.0), 1.0, &cfg()).unwrap();
    assert!(t.evaluate(1.5).is_err());
    assert!(t.evaluate(-0.1).is_err());
}
