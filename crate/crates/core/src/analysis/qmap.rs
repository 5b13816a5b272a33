use serde::Serialize;

use super::report::{Criterion, PropertyReport};
use crate::error::{Error, Result};
use crate::integrator::{first_hit, IntegratorConfig};
use crate::system::{
    contraction_constant, corner_constants, Coefficients, Direction, QuadrantPoint,
};

const LEVEL_TOL: f64 = 1e-12;

/// A point of the closed level set `lambda x + mu y = level` in the quadrant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelPoint {
    pub point: QuadrantPoint,
    pub level: f64,
}

impl LevelPoint {
    pub fn new(dir: &Direction, point: QuadrantPoint, level: f64) -> Result<Self> {
        let point = QuadrantPoint::new(point.x, point.y)?;
        if !(level > 0.0 && level.is_finite()) {
            return Err(Error::Domain(format!(
                "level must be positive, got {level}"
            )));
        }
        let actual = dir.level(&point);
        if (actual - level).abs() > LEVEL_TOL * level {
            return Err(Error::Domain(format!(
                "point ({}, {}) has level {actual}, not {level}",
                point.x, point.y
            )));
        }
        Ok(Self { point, level })
    }

    /// The point of the level set with abscissa `x`, `0 <= x <= level / lambda`.
    pub fn at_x(dir: &Direction, x: f64, level: f64) -> Result<Self> {
        let top = level / dir.lambda();
        if !(0.0..=top).contains(&x) {
            return Err(Error::Domain(format!("x = {x} outside [0, {top}]")));
        }
        let y = if x == top {
            0.0
        } else {
            ((level - dir.lambda() * x) / dir.mu()).max(0.0)
        };
        Self::new(dir, QuadrantPoint { x, y }, level)
    }

    /// True on the open level set, away from both axes.
    pub fn is_open(&self) -> bool {
        self.point.is_interior()
    }
}

/// Fixed point `u*` of `q`: the corner ray met with the unit level set.
pub fn fixed_point(coeffs: &Coefficients, dir: &Direction) -> Result<LevelPoint> {
    let cc = corner_constants(coeffs, dir)?;
    let u = cc.fixed_point;
    // renormalize so rounding in the constants does not leave the level set
    let u = u.scaled(1.0 / dir.level(&u));
    LevelPoint::new(dir, u, 1.0)
}

/// Renormalization map: follow the solution from `u1` to the level 2 and halve.
pub fn poincare_q(
    coeffs: &Coefficients,
    dir: &Direction,
    u1: &LevelPoint,
    cfg: &IntegratorConfig,
) -> Result<LevelPoint> {
    renormalized_hit(coeffs, dir, u1, 2.0, cfg)
}

/// The solution from `u1` at the level `factor`, divided by `factor`.
fn renormalized_hit(
    coeffs: &Coefficients,
    dir: &Direction,
    u1: &LevelPoint,
    factor: f64,
    cfg: &IntegratorConfig,
) -> Result<LevelPoint> {
    if (u1.level - 1.0).abs() > LEVEL_TOL {
        return Err(Error::Precondition(format!(
            "start must lie on the unit level set, got level {}",
            u1.level
        )));
    }
    let (_, hit) = first_hit(coeffs, &u1.point, factor, dir, cfg)?;
    let level = dir.level(&hit) / factor;
    if (level - 1.0).abs() > 1e-9 {
        return Err(Error::Internal(format!(
            "renormalized hit lies at level {level}"
        )));
    }
    let p = hit.scaled(1.0 / (factor * level));
    if !p.is_interior() {
        return Err(Error::Internal(format!(
            "renormalized hit ({}, {}) is not interior",
            p.x, p.y
        )));
    }
    LevelPoint::new(dir, p, 1.0)
}

/// Agreement required between `n` applications of `q` and one long solve.
pub const ITERATION_CONSISTENCY_TOL: f64 = 1e-7;

/// `q^n(u1)` and its distance from `u(tau(2^n), u1) / 2^n` computed in a
/// single solve.
pub fn iterate_q_with_deviation(
    coeffs: &Coefficients,
    dir: &Direction,
    u1: &LevelPoint,
    n: u32,
    cfg: &IntegratorConfig,
) -> Result<(LevelPoint, f64)> {
    if n == 0 {
        return Err(Error::Domain("iteration count must be positive".into()));
    }
    if n > 60 {
        return Err(Error::Domain(format!("iteration count {n} too large")));
    }
    let mut u = *u1;
    for _ in 0..n {
        u = poincare_q(coeffs, dir, &u, cfg)?;
    }
    let long = renormalized_hit(coeffs, dir, u1, 2f64.powi(n as i32), cfg)?;
    Ok((u, u.point.distance(&long.point)))
}

/// `q^n(u1)`, failing if the cross-check against one long solve disagrees
/// by more than [`ITERATION_CONSISTENCY_TOL`].
pub fn iterate_q(
    coeffs: &Coefficients,
    dir: &Direction,
    u1: &LevelPoint,
    n: u32,
    cfg: &IntegratorConfig,
) -> Result<LevelPoint> {
    let (u, deviation) = iterate_q_with_deviation(coeffs, dir, u1, n, cfg)?;
    if deviation > ITERATION_CONSISTENCY_TOL {
        return Err(Error::Internal(format!(
            "{n}-fold q and a single solve differ by {deviation:e}"
        )));
    }
    Ok(u)
}

/// One grid point of the q-map table. `ratio` is `None` at the fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QRow {
    pub u1: QuadrantPoint,
    pub q: QuadrantPoint,
    pub ratio: Option<f64>,
}

/// Distances below this count as the fixed point itself.
const FIXED_POINT_EXCLUSION: f64 = 1e-12;

/// `q` on `grid_size` uniformly spaced abscissae of the closed unit level
/// set, both axis endpoints included.
pub fn qmap_grid(
    coeffs: &Coefficients,
    dir: &Direction,
    grid_size: usize,
    cfg: &IntegratorConfig,
) -> Result<Vec<QRow>> {
    if grid_size < 2 {
        return Err(Error::Domain(format!(
            "grid size must be at least 2, got {grid_size}"
        )));
    }
    coeffs.require_hypothesis()?;
    let star = fixed_point(coeffs, dir)?.point;
    let top = 1.0 / dir.lambda();
    (0..grid_size)
        .map(|i| {
            let x = if i + 1 == grid_size {
                top
            } else {
                top * i as f64 / (grid_size - 1) as f64
            };
            let u1 = LevelPoint::at_x(dir, x, 1.0)?;
            let q = poincare_q(coeffs, dir, &u1, cfg)?;
            let gap = u1.point.distance(&star);
            let ratio = (gap > FIXED_POINT_EXCLUSION).then(|| q.point.distance(&star) / gap);
            Ok(QRow {
                u1: u1.point,
                q: q.point,
                ratio,
            })
        })
        .collect()
}

pub const CONTRACTION_SLACK: f64 = 1e-6;
pub const DEGENERATE_RATIO_TOL: f64 = 1e-8;

/// Largest contraction ratio of `q` over a grid on the closed unit level set.
///
/// Passes when the ratio stays at most `1 - 1e-6`. With `alpha delta = beta
/// gamma` the margin is instead the largest deviation from `1/2`, which must
/// be within `1e-8`. When the explicit constant `k` applies, the bound is
/// tightened to `k + 1e-6`.
pub fn estimate_contraction(
    coeffs: &Coefficients,
    dir: &Direction,
    grid_size: usize,
    cfg: &IntegratorConfig,
) -> Result<PropertyReport> {
    if grid_size < 3 {
        return Err(Error::Domain(format!(
            "grid size must be at least 3, got {grid_size}"
        )));
    }
    let rows = qmap_grid(coeffs, dir, grid_size, cfg)?;
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let max_ratio = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let kc = contraction_constant(coeffs, dir)?;
    let report = if coeffs.determinant() == 0.0 {
        let worst = ratios.iter().map(|r| (r - 0.5).abs()).fold(0.0, f64::max);
        PropertyReport::new(
            "contraction",
            worst,
            DEGENERATE_RATIO_TOL,
            Criterion::AtMost,
            ratios.len(),
        )
    } else {
        let mut tolerance = 1.0 - CONTRACTION_SLACK;
        if kc.explicit {
            tolerance = tolerance.min(kc.k + CONTRACTION_SLACK);
        }
        PropertyReport::new(
            "contraction",
            max_ratio,
            tolerance,
            Criterion::AtMost,
            ratios.len(),
        )
    };
    Ok(report
        .with_param("grid_size", grid_size as f64)
        .with_param("max_ratio", max_ratio)
        .with_param("k", kc.k))
}
