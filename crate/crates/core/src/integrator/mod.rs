//! Trajectories of the quadrant system from any starting point.
//!
//! The start decides the representation:
//!
//! * corner: the self-similar solution `(c sqrt(t), d sqrt(t))` up to a short
//!   handoff time, then interior integration;
//! * `y` axis: the squared-variable system in `(w, z) = (x^2, alpha y - gamma x)`,
//!   regular at `w = 0`, until the solution is safely inside the quadrant;
//! * `x` axis: the same after exchanging the roles of `x` and `y`;
//! * interior: adaptive Dormand-Prince on the original system.

mod dopri;
mod fields;
pub mod reference;
mod trajectory;

pub use reference::{fixed_step_interior, reference_solve};
pub use trajectory::{Regime, Trajectory, TrajectorySample};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::system::{
    corner_constants, find_direction, lower_bound_floor, Coefficients, CornerConstants, Direction,
    QuadrantPoint,
};
use dopri::{integrate, Control};
use fields::{EdgeField, InteriorField, PlanarField};
use trajectory::{Block, Chart, Stepper};

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub initial_step: f64,
    /// Fraction of the admissible interval used for the edge regularization
    /// threshold `eps`.
    pub epsilon_fraction: f64,
    /// Length of the closed-form segment for corner starts.
    pub corner_handoff_time: f64,
    /// Step of the fixed-step reference solver.
    pub oracle_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            initial_step: 1e-6,
            epsilon_fraction: 0.5,
            corner_handoff_time: 1e-6,
            oracle_step: 1e-6,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("initial_step", self.initial_step),
            ("epsilon_fraction", self.epsilon_fraction),
            ("corner_handoff_time", self.corner_handoff_time),
            ("oracle_step", self.oracle_step),
        ];
        for (name, value) in fields {
            if !(value > 0.0) || value.is_nan() {
                return Err(Error::Domain(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if self.epsilon_fraction >= 1.0 {
            return Err(Error::Domain(format!(
                "epsilon_fraction must be below 1, got {}",
                self.epsilon_fraction
            )));
        }
        Ok(())
    }
}

/// The corner solution at time `t`.
pub fn evaluate_closed_form(cc: &CornerConstants, t: f64) -> Result<QuadrantPoint> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    Ok(cc.at(t))
}

fn check_common(coeffs: &Coefficients, t_end: f64, cfg: &IntegratorConfig) -> Result<()> {
    coeffs.require_hypothesis()?;
    cfg.validate()?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Domain(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    Ok(())
}

/// Solves from `u0` up to `t_end`, choosing the representation from the start.
pub fn solve(
    coeffs: &Coefficients,
    u0: &QuadrantPoint,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    coeffs.require_hypothesis()?;
    solve_with_direction(coeffs, &find_direction(coeffs)?, u0, t_end, cfg)
}

pub fn solve_with_direction(
    coeffs: &Coefficients,
    dir: &Direction,
    u0: &QuadrantPoint,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    solve_until(coeffs, dir, u0, t_end, cfg, None)
}

/// Like [`solve_with_direction`], stopping after the first accepted step at
/// which the level `dir.level(u)` reaches `stop_level`.
pub(crate) fn solve_until(
    coeffs: &Coefficients,
    dir: &Direction,
    u0: &QuadrantPoint,
    t_end: f64,
    cfg: &IntegratorConfig,
    stop_level: Option<f64>,
) -> Result<Trajectory> {
    check_common(coeffs, t_end, cfg)?;
    let u0 = QuadrantPoint::new(u0.x, u0.y)?;
    if u0.is_corner() {
        corner_trajectory(coeffs, dir, t_end, cfg, stop_level)
    } else if u0.x == 0.0 {
        edge_trajectory(coeffs, dir, u0.y, t_end, cfg, stop_level)
    } else if u0.y == 0.0 {
        let frame = coeffs.swapped();
        Ok(edge_trajectory(&frame, &dir.swapped(), u0.x, t_end, cfg, stop_level)?.swapped())
    } else {
        let (block, _) = interior_block(coeffs, dir, 0.0, u0, t_end, cfg, stop_level)?;
        Ok(Trajectory::new(*coeffs, *dir, vec![block]))
    }
}

/// Adaptive integration of the original system from an interior point.
pub fn solve_interior(
    coeffs: &Coefficients,
    u0: &QuadrantPoint,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    check_common(coeffs, t_end, cfg)?;
    if !u0.is_interior() {
        return Err(Error::Domain(format!(
            "interior solve needs x0 > 0 and y0 > 0, got ({}, {})",
            u0.x, u0.y
        )));
    }
    let dir = find_direction(coeffs)?;
    let (block, _) = interior_block(coeffs, &dir, 0.0, *u0, t_end, cfg, None)?;
    Ok(Trajectory::new(*coeffs, dir, vec![block]))
}

/// Integration from `(0, y0)` through the regularized squared-variable system.
pub fn solve_edge(
    coeffs: &Coefficients,
    u0: &QuadrantPoint,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    check_common(coeffs, t_end, cfg)?;
    if !(u0.x == 0.0 && u0.y > 0.0) {
        return Err(Error::Domain(format!(
            "edge solve needs x0 = 0 and y0 > 0, got ({}, {})",
            u0.x, u0.y
        )));
    }
    edge_trajectory(coeffs, &find_direction(coeffs)?, u0.y, t_end, cfg, None)
}

/// The corner solution: closed form on `[0, t0]`, interior integration after.
pub fn solve_corner(
    coeffs: &Coefficients,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    check_common(coeffs, t_end, cfg)?;
    corner_trajectory(coeffs, &find_direction(coeffs)?, t_end, cfg, None)
}

fn level_reached(dir: &Direction, p: &QuadrantPoint, stop_level: Option<f64>) -> bool {
    stop_level.is_some_and(|r| dir.level(p) >= r)
}

fn interior_block(
    coeffs: &Coefficients,
    dir: &Direction,
    t_start: f64,
    start: QuadrantPoint,
    t_end: f64,
    cfg: &IntegratorConfig,
    stop_level: Option<f64>,
) -> Result<(Block, bool)> {
    let field = InteriorField::new(*coeffs);
    let run = integrate(&field, t_start, [start.x, start.y], t_end, cfg, |_, s| {
        Ok(if level_reached(dir, &field.to_point(s), stop_level) {
            Control::Stop
        } else {
            Control::Continue
        })
    })?;
    Ok((
        Block::Nodes {
            regime: Regime::Interior,
            chart: Chart::Cartesian { swapped: false },
            stepper: Stepper::Interior(*coeffs),
            nodes: run.nodes,
        },
        run.stopped,
    ))
}

/// Threshold below `min(x, y)` that an edge trajectory must clear twice over
/// before interior integration takes over.
pub(crate) fn edge_floor(cc: &CornerConstants, dir: &Direction, y0: f64) -> f64 {
    0.5 * cc.c.min(cc.d) * dir.mu() * y0 / (dir.lambda() * cc.c + dir.mu() * cc.d)
}

/// Regularization threshold `eps` inside `(0, y0 mu d / (lambda c + mu d))`.
pub(crate) fn edge_epsilon(cc: &CornerConstants, dir: &Direction, y0: f64, fraction: f64) -> f64 {
    fraction * y0 * dir.mu() * cc.d / (dir.lambda() * cc.c + dir.mu() * cc.d)
}

fn edge_trajectory(
    coeffs: &Coefficients,
    dir: &Direction,
    y0: f64,
    t_end: f64,
    cfg: &IntegratorConfig,
    stop_level: Option<f64>,
) -> Result<Trajectory> {
    let cc = corner_constants(coeffs, dir)?;
    let epsilon = edge_epsilon(&cc, dir, y0, cfg.epsilon_fraction);
    let field = EdgeField::new(coeffs, epsilon);
    let floor = edge_floor(&cc, dir, y0);
    let mut hit_level = false;
    let run = integrate(
        &field,
        0.0,
        EdgeField::initial_state(coeffs, y0),
        t_end,
        cfg,
        |t, s| {
            let value = field.capped_quantity(s);
            if !(value > field.cap()) {
                return Err(Error::CapActivated {
                    t,
                    value,
                    cap: field.cap(),
                });
            }
            let p = field.to_point(s);
            if level_reached(dir, &p, stop_level) {
                hit_level = true;
                return Ok(Control::Stop);
            }
            Ok(if p.x.min(p.y) > 2.0 * floor {
                Control::Stop
            } else {
                Control::Continue
            })
        },
    )?;
    let handoff = run.nodes[run.nodes.len() - 1];
    let mut blocks = vec![Block::Nodes {
        regime: Regime::EdgeTransformed,
        chart: Chart::Edge {
            alpha: coeffs.alpha(),
            gamma: coeffs.gamma(),
            swapped: false,
        },
        stepper: Stepper::Edge {
            coeffs: *coeffs,
            epsilon,
        },
        nodes: run.nodes,
    }];
    if run.stopped && !hit_level && handoff.t < t_end {
        let start = field.to_point(handoff.s);
        let (block, _) = interior_block(coeffs, dir, handoff.t, start, t_end, cfg, stop_level)?;
        blocks.push(block);
    }
    Ok(Trajectory::new(*coeffs, *dir, blocks))
}

fn corner_trajectory(
    coeffs: &Coefficients,
    dir: &Direction,
    t_end: f64,
    cfg: &IntegratorConfig,
    stop_level: Option<f64>,
) -> Result<Trajectory> {
    let cc = corner_constants(coeffs, dir)?;
    let t0 = cfg.corner_handoff_time.min(t_end);
    let mut blocks = vec![Block::ClosedForm { cc, t_end: t0 }];
    let handoff = cc.at(t0);
    if t0 < t_end && !level_reached(dir, &handoff, stop_level) {
        let (block, _) = interior_block(coeffs, dir, t0, handoff, t_end, cfg, stop_level)?;
        blocks.push(block);
    }
    Ok(Trajectory::new(*coeffs, *dir, blocks))
}

/// First time `t` with `lambda x(t) + mu y(t) = r`, and the point reached.
pub fn first_hit(
    coeffs: &Coefficients,
    u0: &QuadrantPoint,
    r: f64,
    dir: &Direction,
    cfg: &IntegratorConfig,
) -> Result<(f64, QuadrantPoint)> {
    coeffs.require_hypothesis()?;
    let start = dir.level(u0);
    if !(start <= r) {
        return Err(Error::Precondition(format!(
            "start level {start} exceeds target level {r}"
        )));
    }
    if start == r {
        return Ok((0.0, *u0));
    }
    // the level function satisfies z(t)^2 >= z(0)^2 + 2 Q t
    let horizon = 2.0 * dir.hitting_time_bound(coeffs, r);
    let traj = solve_until(coeffs, dir, u0, horizon, cfg, Some(r))?;
    traj.first_crossing(dir, r, cfg.abs_tol).ok_or_else(|| {
        Error::Internal(format!(
            "level {r} not reached by t = {horizon}, twice the hitting-time bound"
        ))
    })
}

/// First time the level `lambda x + mu y` reaches `r`.
pub fn hitting_time(
    coeffs: &Coefficients,
    u0: &QuadrantPoint,
    r: f64,
    dir: &Direction,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    first_hit(coeffs, u0, r, dir, cfg).map(|(t, _)| t)
}

/// Lower bounds on both coordinates along the solution from `u0`; `(0, 0)`
/// for the corner.
pub fn floors(coeffs: &Coefficients, dir: &Direction, u0: &QuadrantPoint) -> Result<(f64, f64)> {
    if u0.is_corner() {
        return Ok((0.0, 0.0));
    }
    lower_bound_floor(dir, &corner_constants(coeffs, dir)?, u0)
}

#[cfg(test)]
mod tests;
