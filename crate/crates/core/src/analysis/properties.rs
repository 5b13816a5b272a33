use super::qmap::fixed_point;
use super::report::{Criterion, PropertyReport};
use crate::error::{Error, Result};
use crate::integrator::{first_hit, floors, solve, IntegratorConfig, Trajectory};
use crate::system::{corner_constants, theta, Coefficients, Direction, QuadrantPoint};

pub const SYMMETRY_TOL: f64 = 1e-6;
pub const FLOOR_TOL: f64 = 1e-9;
pub const ANGLE_TOL: f64 = 1e-9;
pub const HITTING_TIME_TOL: f64 = 1e-9;
pub const CORNER_UNIQUENESS_TOL: f64 = 1e-7;

fn sup_distance(a: &QuadrantPoint, b: &QuadrantPoint) -> f64 {
    (a.x - b.x).abs().max((a.y - b.y).abs())
}

/// Scaling: `u(r^2 t, u0) = r u(t, u0 / r)`, with margin relative to
/// `1 + |u(r^2 t, u0)|`.
pub fn check_scaling(
    coeffs: &Coefficients,
    u0: &QuadrantPoint,
    r: f64,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<PropertyReport> {
    if !(r > 0.0 && t > 0.0) {
        return Err(Error::Domain(format!(
            "need r > 0 and t > 0, got {r} and {t}"
        )));
    }
    let lhs = solve(coeffs, u0, r * r * t, cfg)?.final_point();
    let rhs = solve(coeffs, &u0.scaled(1.0 / r), t, cfg)?
        .final_point()
        .scaled(r);
    let margin = sup_distance(&lhs, &rhs) / (1.0 + lhs.norm());
    Ok(
        PropertyReport::new("scaling", margin, SYMMETRY_TOL, Criterion::Below, 1)
            .with_param("r", r)
            .with_param("t", t),
    )
}

/// Semigroup: `u(s + t, u0) = u(t, u(s, u0))`, with margin relative to
/// `1 + |u(s + t, u0)|`.
pub fn check_semigroup(
    coeffs: &Coefficients,
    u0: &QuadrantPoint,
    s: f64,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<PropertyReport> {
    if !(s > 0.0 && t >= 0.0) {
        return Err(Error::Domain(format!(
            "need s > 0 and t >= 0, got {s} and {t}"
        )));
    }
    let mid = solve(coeffs, u0, s, cfg)?.final_point();
    let (lhs, rhs) = if t == 0.0 {
        (mid, mid)
    } else {
        (
            solve(coeffs, u0, s + t, cfg)?.final_point(),
            solve(coeffs, &mid, t, cfg)?.final_point(),
        )
    };
    let margin = sup_distance(&lhs, &rhs) / (1.0 + lhs.norm());
    Ok(
        PropertyReport::new("semigroup", margin, SYMMETRY_TOL, Criterion::Below, 1)
            .with_param("s", s)
            .with_param("t", t),
    )
}

/// Qualitative checks on the stored samples of a trajectory, in the order
/// positivity, monotone_level, floors, cone_invariance, angular_monotonicity.
pub fn check_trajectory(traj: &Trajectory) -> Result<Vec<PropertyReport>> {
    let coeffs = traj.coefficients();
    let dir = traj.direction();
    let samples = traj.samples();
    let u0 = traj.initial_point();
    let star = corner_constants(coeffs, dir)?.theta_star();
    let theta0 = if u0.is_corner() { star } else { theta(&u0)? };
    let side = if star > theta0 {
        1.0
    } else if star < theta0 {
        -1.0
    } else {
        0.0
    };
    let (fx, fy) = floors(coeffs, dir, &u0)?;

    let mut positivity = f64::NEG_INFINITY;
    let mut level = f64::NEG_INFINITY;
    let mut floor = f64::NEG_INFINITY;
    let mut cone = f64::NEG_INFINITY;
    let mut angular = f64::NEG_INFINITY;
    let mut prev: Option<(f64, f64)> = None;
    for s in &samples {
        let p = s.point;
        floor = floor.max((fx - p.x).max(fy - p.y));
        if s.t == 0.0 {
            continue;
        }
        positivity = positivity.max(-p.x.min(p.y));
        let z = dir.level(&p);
        let th = theta(&p)?;
        cone = cone.max(if side == 0.0 {
            (th - star).abs()
        } else {
            side * (th - star)
        });
        if let Some((pz, pth)) = prev {
            level = level.max(pz - z);
            angular = angular.max(if side == 0.0 {
                (th - pth).abs()
            } else {
                side * (pth - th)
            });
        }
        prev = Some((z, th));
    }
    let n = samples.len();
    Ok(vec![
        PropertyReport::new("positivity", positivity, 0.0, Criterion::Below, n),
        PropertyReport::new("monotone_level", level, 0.0, Criterion::Below, n),
        PropertyReport::new("floors", floor, FLOOR_TOL, Criterion::AtMost, n),
        PropertyReport::new("cone_invariance", cone, ANGLE_TOL, Criterion::AtMost, n),
        PropertyReport::new(
            "angular_monotonicity",
            angular,
            ANGLE_TOL,
            Criterion::AtMost,
            n,
        ),
    ])
}

/// Strict decrease of the angular gap: `|theta(u(T)) - theta*| <
/// |theta(u0) - theta*|` at `T = 10 (lambda x0 + mu y0)^2`.
pub fn check_slope_limit(
    coeffs: &Coefficients,
    dir: &Direction,
    u0: &QuadrantPoint,
    cfg: &IntegratorConfig,
) -> Result<PropertyReport> {
    let star = corner_constants(coeffs, dir)?.theta_star();
    let gap0 = (theta(u0)? - star).abs();
    if gap0 == 0.0 {
        return Err(Error::Precondition(
            "start lies on the invariant ray".into(),
        ));
    }
    let horizon = 10.0 * dir.level(u0).powi(2);
    let end = solve(coeffs, u0, horizon, cfg)?.final_point();
    let gap = (theta(&end)? - star).abs();
    Ok(
        PropertyReport::new("slope_limit", gap - gap0, 0.0, Criterion::Below, 1)
            .with_param("initial_gap", gap0)
            .with_param("final_gap", gap),
    )
}

/// `tau(r) <= r^2 / (2 Q) + 1e-9` for a start below the level `r`.
pub fn check_hitting_time_bound(
    coeffs: &Coefficients,
    dir: &Direction,
    u0: &QuadrantPoint,
    r: f64,
    cfg: &IntegratorConfig,
) -> Result<PropertyReport> {
    let (tau, _) = first_hit(coeffs, u0, r, dir, cfg)?;
    let bound = dir.hitting_time_bound(coeffs, r);
    Ok(PropertyReport::new(
        "hitting_time_bound",
        tau - bound,
        HITTING_TIME_TOL,
        Criterion::AtMost,
        1,
    )
    .with_param("r", r)
    .with_param("tau", tau))
}

/// The corner solution met with the level `s`, divided by `s`, is `u*`.
pub fn corner_uniqueness(
    coeffs: &Coefficients,
    dir: &Direction,
    levels: &[f64],
    cfg: &IntegratorConfig,
) -> Result<PropertyReport> {
    let star = fixed_point(coeffs, dir)?.point;
    let mut worst = f64::NEG_INFINITY;
    for &s in levels {
        let (_, p) = first_hit(coeffs, &QuadrantPoint::CORNER, s, dir, cfg)?;
        worst = worst.max(p.scaled(1.0 / s).distance(&star));
    }
    Ok(PropertyReport::new(
        "corner_uniqueness",
        worst,
        CORNER_UNIQUENESS_TOL,
        Criterion::AtMost,
        levels.len(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::solve;
    use crate::system::find_direction;

    fn co(a: f64, b: f64, g: f64, d: f64) -> Coefficients {
        Coefficients::new(a, b, g, d).unwrap()
    }

    fn pt(x: f64, y: f64) -> QuadrantPoint {
        QuadrantPoint::new(x, y).unwrap()
    }

    fn cfg() -> IntegratorConfig {
        IntegratorConfig::default()
    }

    #[test]
    fn scaling_and_semigroup_examples() {
        let c = co(1.0, 0.0, 0.0, 1.0);
        let r = check_scaling(&c, &pt(1.0, 1.0), 1.0, 1.0, &cfg()).unwrap();
        assert_eq!(r.margin, 0.0);
        let r = check_scaling(&c, &pt(1.0, 1.0), 2.0, 1.0, &cfg()).unwrap();
        assert!(r.pass, "{r}");
        let r = check_scaling(&c, &QuadrantPoint::CORNER, 3.0, 0.5, &cfg()).unwrap();
        assert!(r.pass, "{r}");

        let r = check_semigroup(&c, &pt(0.5, 2.0), 1.0, 0.0, &cfg()).unwrap();
        assert_eq!(r.margin, 0.0);
        let r = check_semigroup(&c, &QuadrantPoint::CORNER, 1.0, 1.0, &cfg()).unwrap();
        assert!(r.pass, "{r}");
        let c = co(2.0, -1.0, 1.5, 0.7);
        let r = check_semigroup(&c, &pt(0.3, 1.2), 0.4, 1.0, &cfg()).unwrap();
        assert!(r.pass, "{r}");
    }

    #[test]
    fn trajectory_invariants_hold() {
        let c = co(1.0, -0.5, 0.8, 2.0);
        for u0 in [
            QuadrantPoint::CORNER,
            pt(0.0, 1.0),
            pt(1.0, 0.0),
            pt(0.2, 3.0),
            pt(3.0, 0.1),
        ] {
            let traj = solve(&c, &u0, 5.0, &cfg()).unwrap();
            for r in check_trajectory(&traj).unwrap() {
                assert!(r.pass, "{u0:?}: {r}");
            }
        }
    }

    #[test]
    fn slope_gap_shrinks() {
        let c = co(1.0, 0.4, -0.3, 1.0);
        let dir = find_direction(&c).unwrap();
        for u0 in [pt(0.0, 1.0), pt(1.0, 0.0), pt(1.0, 2.0)] {
            let r = check_slope_limit(&c, &dir, &u0, &cfg()).unwrap();
            assert!(r.pass, "{r}");
        }
    }

    #[test]
    fn hitting_time_and_corner_witness() {
        let c = co(1.0, 0.0, 0.0, 1.0);
        let dir = find_direction(&c).unwrap();
        let r = check_hitting_time_bound(&c, &dir, &pt(1.0, 0.0), 2.0, &cfg()).unwrap();
        assert!(r.pass);
        assert!((r.params["tau"] - 9.0 / 32.0).abs() < 1e-9);

        let c = co(1.3, -0.4, 0.9, 0.6);
        let dir = find_direction(&c).unwrap();
        let r = corner_uniqueness(&c, &dir, &[0.25, 0.5, 1.0, 2.0, 4.0], &cfg()).unwrap();
        assert!(r.pass, "{r}");
    }
}
