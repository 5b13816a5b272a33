//! Brute-force oracle: classical fourth-order Runge-Kutta at a fixed step,
//! over the same regime decomposition as the adaptive solver. Shares the
//! right-hand sides but no step control with it.

use super::fields::{EdgeField, InteriorField, PlanarField};
use super::trajectory::{Block, Chart, Node, Stepper};
use super::{edge_epsilon, edge_floor, IntegratorConfig, Regime, Trajectory, TrajectorySample};
use crate::error::{Error, Result};
use crate::system::{corner_constants, find_direction, Coefficients, Direction, QuadrantPoint};

fn rk4_step<F: PlanarField>(field: &F, s: [f64; 2], k1: [f64; 2], h: f64) -> Option<[f64; 2]> {
    let shift = |k: [f64; 2], a: f64| [s[0] + a * h * k[0], s[1] + a * h * k[1]];
    let y2 = shift(k1, 0.5);
    if !field.admissible(y2) {
        return None;
    }
    let k2 = field.eval(y2);
    let y3 = shift(k2, 0.5);
    if !field.admissible(y3) {
        return None;
    }
    let k3 = field.eval(y3);
    let y4 = shift(k3, 1.0);
    if !field.admissible(y4) {
        return None;
    }
    let k4 = field.eval(y4);
    let next = [
        s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ];
    field.admissible(next).then_some(next)
}

/// Fixed-step run; `stop` is consulted after every step.
fn march<F: PlanarField>(
    field: &F,
    t0: f64,
    s0: [f64; 2],
    t_end: f64,
    step: f64,
    mut stop: impl FnMut(f64, [f64; 2]) -> Result<bool>,
) -> Result<Vec<Node>> {
    let mut nodes = vec![Node {
        t: t0,
        s: s0,
        f: field.eval(s0),
        dense: [0.0; 2],
    }];
    let n_steps = ((t_end - t0) / step).ceil() as usize;
    for i in 1..=n_steps {
        let prev = nodes[nodes.len() - 1];
        let t = if i == n_steps {
            t_end
        } else {
            t0 + i as f64 * step
        };
        let Some(s) = rk4_step(field, prev.s, prev.f, t - prev.t) else {
            return Err(Error::StepFailure {
                t: prev.t,
                reason: "fixed step left the admissible region".into(),
            });
        };
        nodes.push(Node {
            t,
            s,
            f: field.eval(s),
            dense: [0.0; 2],
        });
        if stop(t, s)? {
            break;
        }
    }
    Ok(nodes)
}

fn interior_nodes(
    coeffs: &Coefficients,
    t0: f64,
    u: QuadrantPoint,
    t_end: f64,
    step: f64,
) -> Result<Block> {
    let field = InteriorField::new(*coeffs);
    let nodes = march(&field, t0, [u.x, u.y], t_end, step, |_, _| Ok(false))?;
    Ok(Block::Nodes {
        regime: Regime::Interior,
        chart: Chart::Cartesian { swapped: false },
        stepper: Stepper::None,
        nodes,
    })
}

fn edge_blocks(
    coeffs: &Coefficients,
    dir: &Direction,
    y0: f64,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<Block>> {
    let cc = corner_constants(coeffs, dir)?;
    let field = EdgeField::new(coeffs, edge_epsilon(&cc, dir, y0, cfg.epsilon_fraction));
    let floor = edge_floor(&cc, dir, y0);
    let nodes = march(
        &field,
        0.0,
        EdgeField::initial_state(coeffs, y0),
        t_end,
        cfg.oracle_step,
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
            Ok(p.x.min(p.y) > 2.0 * floor)
        },
    )?;
    let last = nodes[nodes.len() - 1];
    let mut blocks = vec![Block::Nodes {
        regime: Regime::EdgeTransformed,
        chart: Chart::Edge {
            alpha: coeffs.alpha(),
            gamma: coeffs.gamma(),
            swapped: false,
        },
        stepper: Stepper::None,
        nodes,
    }];
    if last.t < t_end {
        blocks.push(interior_nodes(
            coeffs,
            last.t,
            field.to_point(last.s),
            t_end,
            cfg.oracle_step,
        )?);
    }
    Ok(blocks)
}

/// Fixed-step solve at `cfg.oracle_step`.
pub fn reference_solve(
    coeffs: &Coefficients,
    u0: &QuadrantPoint,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    super::check_common(coeffs, t_end, cfg)?;
    let u0 = QuadrantPoint::new(u0.x, u0.y)?;
    let dir = find_direction(coeffs)?;
    let step = cfg.oracle_step;
    if u0.is_corner() {
        let cc = corner_constants(coeffs, &dir)?;
        let t0 = cfg.corner_handoff_time.min(t_end);
        let mut blocks = vec![Block::ClosedForm { cc, t_end: t0 }];
        if t0 < t_end {
            blocks.push(interior_nodes(coeffs, t0, cc.at(t0), t_end, step)?);
        }
        Ok(Trajectory::new(*coeffs, dir, blocks))
    } else if u0.x == 0.0 {
        Ok(Trajectory::new(
            *coeffs,
            dir,
            edge_blocks(coeffs, &dir, u0.y, t_end, cfg)?,
        ))
    } else if u0.y == 0.0 {
        let frame = coeffs.swapped();
        let sdir = dir.swapped();
        let blocks = edge_blocks(&frame, &sdir, u0.x, t_end, cfg)?;
        Ok(Trajectory::new(frame, sdir, blocks).swapped())
    } else {
        Ok(Trajectory::new(
            *coeffs,
            dir,
            vec![interior_nodes(coeffs, 0.0, u0, t_end, step)?],
        ))
    }
}

/// Fixed-step integration of the original system from an interior point,
/// for any valid coefficients, including those outside (H). Fails if the
/// path leaves the open quadrant.
pub fn fixed_step_interior(
    coeffs: &Coefficients,
    u0: &QuadrantPoint,
    t_end: f64,
    step: f64,
) -> Result<Vec<TrajectorySample>> {
    if !u0.is_interior() {
        return Err(Error::Domain(
            "fixed-step interior integration needs an interior start".into(),
        ));
    }
    if !(step > 0.0 && t_end > 0.0) {
        return Err(Error::Domain(format!(
            "step and t_end must be positive, got {step} and {t_end}"
        )));
    }
    let field = InteriorField::new(*coeffs);
    let nodes = march(&field, 0.0, [u0.x, u0.y], t_end, step, |_, _| Ok(false))?;
    Ok(nodes
        .into_iter()
        .map(|n| TrajectorySample {
            t: n.t,
            point: QuadrantPoint {
                x: n.s[0],
                y: n.s[1],
            },
            regime: Regime::Interior,
        })
        .collect())
}
