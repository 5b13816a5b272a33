use serde::Serialize;

use super::angular::plus_branch;
use super::{Coefficients, Direction, QuadrantPoint};
use crate::error::{Error, Result};

/// Relative residual allowed in the defining system `c/2 = alpha/c + beta/d`,
/// `d/2 = gamma/c + delta/d`.
pub const CORNER_RESIDUAL_TOL: f64 = 1e-10;

/// Constants of the self-similar corner solution `x = c sqrt(t)`, `y = d sqrt(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CornerConstants {
    pub c: f64,
    pub d: f64,
    pub big_c: f64,
    pub big_d: f64,
    /// `d / c`, the slope of the invariant ray.
    pub slope: f64,
    /// `(c, d) / (lambda c + mu d)`, the point of the invariant ray on the unit level set.
    pub fixed_point: QuadrantPoint,
}

impl CornerConstants {
    /// Sum of the relative residuals of the two defining equations; each
    /// residual is scaled by the magnitudes of its own terms.
    pub fn residual(&self, coeffs: &Coefficients) -> f64 {
        let (c, d) = (self.c, self.d);
        let e1 = c / 2.0 - coeffs.alpha() / c - coeffs.beta() / d;
        let s1 = c / 2.0 + coeffs.alpha() / c + coeffs.beta().abs() / d;
        let e2 = d / 2.0 - coeffs.gamma() / c - coeffs.delta() / d;
        let s2 = d / 2.0 + coeffs.gamma().abs() / c + coeffs.delta() / d;
        e1.abs() / s1 + e2.abs() / s2
    }

    /// Angle of the invariant ray.
    pub fn theta_star(&self) -> f64 {
        self.d.atan2(self.c)
    }

    /// The corner solution at time `t`.
    pub fn at(&self, t: f64) -> QuadrantPoint {
        let s = t.sqrt();
        QuadrantPoint {
            x: self.c * s,
            y: self.d * s,
        }
    }
}

/// `2 alpha + (beta/delta)(beta - gamma + sqrt((beta-gamma)^2 + 4 alpha delta))`,
/// evaluated without cancellation when `beta < 0`.
fn squared_constant(coeffs: &Coefficients) -> f64 {
    let Coefficients {
        alpha,
        beta,
        gamma,
        delta,
    } = *coeffs;
    if beta >= 0.0 {
        2.0 * alpha + beta / delta * plus_branch(coeffs)
    } else {
        let root = coeffs.discriminant_root();
        let det = coeffs.determinant();
        4.0 * alpha * det / (2.0 * alpha * delta - beta * gamma + beta * beta - beta * root)
    }
}

/// Corner constants for coefficients under (H), normalized with `dir`.
pub fn corner_constants(coeffs: &Coefficients, dir: &Direction) -> Result<CornerConstants> {
    coeffs.require_hypothesis()?;
    let big_c = squared_constant(coeffs);
    let big_d = squared_constant(&coeffs.swapped());
    if !(big_c > 0.0 && big_d > 0.0 && big_c.is_finite() && big_d.is_finite()) {
        return Err(Error::Internal(format!(
            "corner constants not positive: C = {big_c}, D = {big_d}"
        )));
    }
    let c = big_c.sqrt();
    let d = big_d.sqrt();
    let norm = dir.lambda() * c + dir.mu() * d;
    let cc = CornerConstants {
        c,
        d,
        big_c,
        big_d,
        slope: d / c,
        fixed_point: QuadrantPoint {
            x: c / norm,
            y: d / norm,
        },
    };
    let residual = cc.residual(coeffs);
    if !(residual < CORNER_RESIDUAL_TOL) {
        return Err(Error::Internal(format!(
            "corner constants residual {residual:e} exceeds {CORNER_RESIDUAL_TOL:e}"
        )));
    }
    Ok(cc)
}

/// Lower bounds on `x(t)` and `y(t)` valid for all `t >= 0` along the
/// solution from `u0`.
pub fn lower_bound_floor(
    dir: &Direction,
    cc: &CornerConstants,
    u0: &QuadrantPoint,
) -> Result<(f64, f64)> {
    if u0.is_corner() {
        return Err(Error::Domain(
            "lower bound floor is undefined at the corner".into(),
        ));
    }
    let share = dir.level(u0) / (dir.lambda() * cc.c + dir.mu() * cc.d);
    Ok((u0.x.min(cc.c * share), u0.y.min(cc.d * share)))
}

/// Explicit contraction estimates for the renormalization map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionConstant {
    pub k1: f64,
    pub k2: f64,
    /// `1 - min(k1, k2)`.
    pub k: f64,
    /// True when `alpha delta < beta gamma`, the only branch on which the
    /// estimate `|q(u) - u*| <= k |u - u*|` is derived with these constants.
    /// There `k1, k2 < 1/2`; elsewhere `k` may fall outside `(0, 1)` and only
    /// the strict inequality without a constant is available.
    pub explicit: bool,
}

fn first_constant(coeffs: &Coefficients, dir: &Direction) -> f64 {
    dir.lambda() * dir.mu() * plus_branch(coeffs) / (4.0 * dir.growth_rate(coeffs))
}

pub fn contraction_constant(coeffs: &Coefficients, dir: &Direction) -> Result<ContractionConstant> {
    coeffs.require_hypothesis()?;
    let k1 = first_constant(coeffs, dir);
    let k2 = first_constant(&coeffs.swapped(), &dir.swapped());
    if !(k1 > 0.0 && k2 > 0.0) {
        return Err(Error::Internal(format!(
            "contraction constants not positive: k1 = {k1}, k2 = {k2}"
        )));
    }
    Ok(ContractionConstant {
        k1,
        k2,
        k: 1.0 - k1.min(k2),
        explicit: coeffs.determinant() < 0.0,
    })
}

// kept next to the constants so the tests below can compare both forms
#[cfg(test)]
fn squared_constant_direct(coeffs: &Coefficients) -> f64 {
    2.0 * coeffs.alpha()
        + coeffs.beta() / coeffs.delta()
            * (coeffs.beta() - coeffs.gamma() + coeffs.discriminant_root())
}
