use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::comparison::{check_comparison, PiecewiseLinear};
use super::properties::{
    check_hitting_time_bound, check_scaling, check_semigroup, check_slope_limit, check_trajectory,
    corner_uniqueness, CORNER_UNIQUENESS_TOL, FLOOR_TOL, HITTING_TIME_TOL, SYMMETRY_TOL,
};
use super::qmap::{
    estimate_contraction, fixed_point, iterate_q_with_deviation, poincare_q, LevelPoint,
    CONTRACTION_SLACK, ITERATION_CONSISTENCY_TOL,
};
use super::report::{merge_reports, Criterion, PropertyReport};
use crate::error::Result;
use crate::integrator::{solve, IntegratorConfig};
use crate::system::{
    corner_constants, find_direction, Coefficients, Direction, QuadrantPoint, CORNER_RESIDUAL_TOL,
};

/// Report names returned by [`verify_all`], in order.
pub const PROPERTY_NAMES: [&str; 16] = [
    "classification",
    "corner_residual",
    "q_fixed_point",
    "contraction",
    "q_iteration",
    "corner_uniqueness",
    "scaling",
    "semigroup",
    "comparison",
    "positivity",
    "monotone_level",
    "floors",
    "cone_invariance",
    "angular_monotonicity",
    "slope_limit",
    "hitting_time_bound",
];

const CONTRACTION_GRID: usize = 33;
const ITERATIONS: u32 = 10;
const COMPARISON_GRID: usize = 1000;
const RANDOM_STARTS: usize = 3;

/// Random coefficients with `alpha, delta` in `(0, 5]` and `beta, gamma` in
/// `[-5, 5]`, redrawn until the hypothesis holds.
pub fn sample_coefficients<R: Rng + ?Sized>(rng: &mut R) -> Coefficients {
    loop {
        let alpha = 5.0 - rng.gen_range(0.0..5.0);
        let delta = 5.0 - rng.gen_range(0.0..5.0);
        let beta = rng.gen_range(-5.0..=5.0);
        let gamma = rng.gen_range(-5.0..=5.0);
        if let Ok(c) = Coefficients::new(alpha, beta, gamma, delta) {
            if c.require_hypothesis().is_ok() {
                return c;
            }
        }
    }
}

/// Uniform random point of the open level set `lambda x + mu y = r`.
pub fn sample_level_point<R: Rng + ?Sized>(rng: &mut R, dir: &Direction, r: f64) -> QuadrantPoint {
    let top = r / dir.lambda();
    loop {
        let x = rng.gen_range(0.0..top);
        let y = (r - dir.lambda() * x) / dir.mu();
        if x > 0.0 && y > 0.0 {
            return QuadrantPoint { x, y };
        }
    }
}

fn or_failed(
    name: &str,
    tolerance: f64,
    criterion: Criterion,
    r: Result<PropertyReport>,
) -> PropertyReport {
    r.unwrap_or_else(|e| PropertyReport::failed(name, tolerance, criterion, e))
}

/// Runs every property check on seeded random inputs and returns one report
/// per entry of [`PROPERTY_NAMES`]. Coefficients outside the hypothesis give
/// a single failing `classification` report.
pub fn verify_all(coeffs: &Coefficients, cfg: &IntegratorConfig, seed: u64) -> Vec<PropertyReport> {
    if let Err(e) = coeffs.require_hypothesis() {
        return vec![
            PropertyReport::new("classification", 1.0, 0.0, Criterion::AtMost, 1).with_detail(e),
        ];
    }
    let dir = match find_direction(coeffs) {
        Ok(d) => d,
        Err(e) => {
            return vec![PropertyReport::failed(
                "classification",
                0.0,
                Criterion::AtMost,
                e,
            )]
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reports = vec![PropertyReport::new(
        "classification",
        0.0,
        0.0,
        Criterion::AtMost,
        1,
    )];

    reports.push(or_failed(
        "corner_residual",
        CORNER_RESIDUAL_TOL,
        Criterion::Below,
        corner_constants(coeffs, &dir).map(|cc| {
            PropertyReport::new(
                "corner_residual",
                cc.residual(coeffs),
                CORNER_RESIDUAL_TOL,
                Criterion::Below,
                1,
            )
        }),
    ));

    reports.push(or_failed(
        "q_fixed_point",
        1e-9,
        Criterion::Below,
        fixed_point(coeffs, &dir).and_then(|star| {
            let q = poincare_q(coeffs, &dir, &star, cfg)?;
            Ok(PropertyReport::new(
                "q_fixed_point",
                q.point.distance(&star.point),
                1e-9,
                Criterion::Below,
                1,
            ))
        }),
    ));

    reports.push(or_failed(
        "contraction",
        1.0 - CONTRACTION_SLACK,
        Criterion::AtMost,
        estimate_contraction(coeffs, &dir, CONTRACTION_GRID, cfg),
    ));

    let u1 = sample_level_point(&mut rng, &dir, 1.0);
    reports.push(or_failed(
        "q_iteration",
        ITERATION_CONSISTENCY_TOL,
        Criterion::AtMost,
        LevelPoint::new(&dir, u1, 1.0).and_then(|u1| {
            let (_, dev) = iterate_q_with_deviation(coeffs, &dir, &u1, ITERATIONS, cfg)?;
            Ok(PropertyReport::new(
                "q_iteration",
                dev,
                ITERATION_CONSISTENCY_TOL,
                Criterion::AtMost,
                1,
            )
            .with_param("n", f64::from(ITERATIONS)))
        }),
    ));

    reports.push(or_failed(
        "corner_uniqueness",
        CORNER_UNIQUENESS_TOL,
        Criterion::AtMost,
        corner_uniqueness(coeffs, &dir, &[0.25, 0.5, 1.0, 2.0, 4.0], cfg),
    ));

    let level = rng.gen_range(0.5..2.0);
    let u0 = sample_level_point(&mut rng, &dir, level);
    for r in [0.5, 2.0, 10.0] {
        for t in [0.1, 1.0] {
            reports.push(or_failed(
                "scaling",
                SYMMETRY_TOL,
                Criterion::Below,
                check_scaling(coeffs, &u0, r, t, cfg),
            ));
        }
    }
    for s in [0.1, 1.0] {
        for t in [0.1, 1.0] {
            reports.push(or_failed(
                "semigroup",
                SYMMETRY_TOL,
                Criterion::Below,
                check_semigroup(coeffs, &u0, s, t, cfg),
            ));
        }
    }

    reports.extend(comparison_reports(coeffs.alpha(), &mut rng));

    let r0 = rng.gen_range(0.5..2.0);
    let mut starts = vec![
        QuadrantPoint::CORNER,
        QuadrantPoint {
            x: 0.0,
            y: r0 / dir.mu(),
        },
        QuadrantPoint {
            x: r0 / dir.lambda(),
            y: 0.0,
        },
    ];
    starts.extend((0..RANDOM_STARTS).map(|_| sample_level_point(&mut rng, &dir, r0)));
    for u in &starts {
        let horizon = if u.is_corner() { 1.0 } else { 10.0 * r0 * r0 };
        match solve(coeffs, u, horizon, cfg).and_then(|t| check_trajectory(&t)) {
            Ok(rs) => reports.extend(rs),
            Err(e) => {
                for (name, tol, crit) in [
                    ("positivity", 0.0, Criterion::Below),
                    ("monotone_level", 0.0, Criterion::Below),
                    ("floors", FLOOR_TOL, Criterion::AtMost),
                    ("cone_invariance", FLOOR_TOL, Criterion::AtMost),
                    ("angular_monotonicity", FLOOR_TOL, Criterion::AtMost),
                ] {
                    reports.push(PropertyReport::failed(name, tol, crit, &e));
                }
            }
        }
    }
    for u in starts.iter().filter(|u| !u.is_corner()) {
        reports.push(or_failed(
            "slope_limit",
            0.0,
            Criterion::Below,
            check_slope_limit(coeffs, &dir, u, cfg),
        ));
    }

    for r in [1.0, 2.0, 8.0] {
        let q = r / 4.0;
        let level_starts = [
            QuadrantPoint::CORNER,
            QuadrantPoint {
                x: 0.0,
                y: q / dir.mu(),
            },
            QuadrantPoint {
                x: q / dir.lambda(),
                y: 0.0,
            },
            sample_level_point(&mut rng, &dir, q),
        ];
        for u in &level_starts {
            reports.push(or_failed(
                "hitting_time_bound",
                HITTING_TIME_TOL,
                Criterion::AtMost,
                check_hitting_time_bound(coeffs, &dir, u, r, cfg),
            ));
        }
    }

    let merged = merge_reports(reports);
    debug_assert!(merged.iter().map(|r| r.name.as_str()).eq(PROPERTY_NAMES));
    merged
}

/// Random nondecreasing piecewise-linear function on `[0, 1]` with values
/// starting at `start`.
fn random_ramp<R: Rng + ?Sized>(rng: &mut R, start: f64) -> Vec<f64> {
    let mut v = vec![start];
    for _ in 0..4 {
        let last = v[v.len() - 1];
        v.push(last + rng.gen_range(0.0..1.0));
    }
    v
}

fn comparison_reports<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Vec<PropertyReport> {
    let knots = vec![0.0, 0.2, 0.45, 0.7, 1.0];
    let mut run = || -> Result<Vec<PropertyReport>> {
        let zero = PiecewiseLinear::constant(0.0, 1.0)?;
        let ramp = PiecewiseLinear::linear(0.0, 1.0, 1.0)?;
        let one = PiecewiseLinear::constant(1.0, 1.0)?;
        let mut out = vec![
            check_comparison(alpha, &zero, &ramp, 1.0, COMPARISON_GRID)?,
            check_comparison(alpha, &zero, &one, 1.0, COMPARISON_GRID)?,
        ];
        // v1 arbitrary, v2 = v1 + nondecreasing nonnegative gap
        let v1: Vec<f64> = knots.iter().map(|_| rng.gen_range(0.0..1.0)).collect();
        let start = rng.gen_range(0.0..0.5);
        let gap = random_ramp(rng, start);
        let v2: Vec<f64> = v1.iter().zip(&gap).map(|(a, g)| a + g).collect();
        out.push(check_comparison(
            alpha,
            &PiecewiseLinear::new(knots.clone(), v1)?,
            &PiecewiseLinear::new(knots.clone(), v2)?,
            1.0,
            COMPARISON_GRID,
        )?);
        Ok(out)
    };
    run().unwrap_or_else(|e| {
        vec![PropertyReport::failed(
            "comparison",
            1e-9,
            Criterion::AtMost,
            e,
        )]
    })
}
