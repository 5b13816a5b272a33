use std::fmt;

use serde::Serialize;

use super::dopri::partial_step;
use super::fields::{edge_point, EdgeField, InteriorField};
use crate::error::{Error, Result};
use crate::system::{Coefficients, CornerConstants, Direction, QuadrantPoint};

/// Which representation produced a piece of trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    ClosedFormCorner,
    EdgeTransformed,
    Interior,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::ClosedFormCorner => "closed_form_corner",
            Regime::EdgeTransformed => "edge_transformed",
            Regime::Interior => "interior",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub point: QuadrantPoint,
    pub regime: Regime,
}

/// Accepted step endpoint with the state derivative. `dense` is the
/// quartic correction of the Dormand-Prince continuous extension for the
/// step ending here; zero gives plain cubic Hermite interpolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Node {
    pub t: f64,
    pub s: [f64; 2],
    pub f: [f64; 2],
    pub dense: [f64; 2],
}

/// How a stored state maps to a quadrant point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Chart {
    Cartesian {
        swapped: bool,
    },
    /// `(w, z)` with `x = sqrt(w)`, `y = (gamma x + z) / alpha`, in the frame
    /// where the start lies on the `y` axis.
    Edge {
        alpha: f64,
        gamma: f64,
        swapped: bool,
    },
}

impl Chart {
    fn point(&self, s: [f64; 2]) -> QuadrantPoint {
        let (p, swapped) = match *self {
            Chart::Cartesian { swapped } => (QuadrantPoint { x: s[0], y: s[1] }, swapped),
            Chart::Edge {
                alpha,
                gamma,
                swapped,
            } => (edge_point(alpha, gamma, s), swapped),
        };
        if swapped {
            p.swapped()
        } else {
            p
        }
    }

    fn swapped(self) -> Self {
        match self {
            Chart::Cartesian { swapped } => Chart::Cartesian { swapped: !swapped },
            Chart::Edge {
                alpha,
                gamma,
                swapped,
            } => Chart::Edge {
                alpha,
                gamma,
                swapped: !swapped,
            },
        }
    }
}

/// Right-hand side of an adaptive block, kept so that dense output can
/// re-take the fifth-order step from the preceding node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Stepper {
    Interior(Coefficients),
    Edge {
        coeffs: Coefficients,
        epsilon: f64,
    },
    /// Fixed-step nodes: interpolate only.
    None,
}

impl Stepper {
    fn restep(&self, a: &Node, h: f64) -> Option<[f64; 2]> {
        match self {
            Stepper::Interior(coeffs) => partial_step(&InteriorField::new(*coeffs), a.s, a.f, h),
            Stepper::Edge { coeffs, epsilon } => {
                partial_step(&EdgeField::new(coeffs, *epsilon), a.s, a.f, h)
            }
            Stepper::None => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Block {
    ClosedForm {
        cc: CornerConstants,
        t_end: f64,
    },
    Nodes {
        regime: Regime,
        chart: Chart,
        stepper: Stepper,
        nodes: Vec<Node>,
    },
}

impl Block {
    fn t_start(&self) -> f64 {
        match self {
            Block::ClosedForm { .. } => 0.0,
            Block::Nodes { nodes, .. } => nodes[0].t,
        }
    }

    fn t_end(&self) -> f64 {
        match self {
            Block::ClosedForm { t_end, .. } => *t_end,
            Block::Nodes { nodes, .. } => nodes[nodes.len() - 1].t,
        }
    }

    fn regime(&self) -> Regime {
        match self {
            Block::ClosedForm { .. } => Regime::ClosedFormCorner,
            Block::Nodes { regime, .. } => *regime,
        }
    }

    fn evaluate(&self, t: f64) -> QuadrantPoint {
        match self {
            Block::ClosedForm { cc, .. } => cc.at(t),
            Block::Nodes {
                chart,
                stepper,
                nodes,
                ..
            } => {
                if nodes.len() == 1 {
                    return chart.point(nodes[0].s);
                }
                let i = nodes
                    .partition_point(|n| n.t <= t)
                    .clamp(1, nodes.len() - 1);
                let (a, b) = (&nodes[i - 1], &nodes[i]);
                let s = if t == a.t {
                    a.s
                } else if t >= b.t {
                    b.s
                } else {
                    stepper
                        .restep(a, t - a.t)
                        .unwrap_or_else(|| interpolate(a, b, t))
                };
                chart.point(s)
            }
        }
    }

    pub(crate) fn swapped(self) -> Self {
        match self {
            Block::Nodes {
                regime,
                chart,
                stepper,
                nodes,
            } => Block::Nodes {
                regime,
                chart: chart.swapped(),
                stepper,
                nodes,
            },
            Block::ClosedForm { cc, t_end } => Block::ClosedForm {
                cc: CornerConstants {
                    c: cc.d,
                    d: cc.c,
                    big_c: cc.big_d,
                    big_d: cc.big_c,
                    slope: 1.0 / cc.slope,
                    fixed_point: cc.fixed_point.swapped(),
                },
                t_end,
            },
        }
    }
}

fn interpolate(a: &Node, b: &Node, t: f64) -> [f64; 2] {
    let h = b.t - a.t;
    if h <= 0.0 {
        return b.s;
    }
    let th = ((t - a.t) / h).clamp(0.0, 1.0);
    let th1 = 1.0 - th;
    std::array::from_fn(|i| {
        let diff = b.s[i] - a.s[i];
        let r3 = h * a.f[i] - diff;
        let r4 = diff - h * b.f[i] - r3;
        a.s[i] + th * (diff + th1 * (r3 + th * (r4 + th1 * b.dense[i])))
    })
}

/// A computed solution with dense output on `[0, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    coeffs: Coefficients,
    direction: Direction,
    blocks: Vec<Block>,
}

impl Trajectory {
    pub(crate) fn new(coeffs: Coefficients, direction: Direction, blocks: Vec<Block>) -> Self {
        debug_assert!(!blocks.is_empty());
        Self {
            coeffs,
            direction,
            blocks,
        }
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn direction(&self) -> &Direction {
        &self.direction
    }

    pub fn t_end(&self) -> f64 {
        self.blocks[self.blocks.len() - 1].t_end()
    }

    pub fn initial_point(&self) -> QuadrantPoint {
        self.blocks[0].evaluate(self.blocks[0].t_start())
    }

    pub fn final_point(&self) -> QuadrantPoint {
        let last = &self.blocks[self.blocks.len() - 1];
        last.evaluate(last.t_end())
    }

    fn block_at(&self, t: f64) -> &Block {
        self.blocks
            .iter()
            .find(|b| t <= b.t_end())
            .unwrap_or(&self.blocks[self.blocks.len() - 1])
    }

    /// Dense-output evaluation at any `t` in `[0, t_end]`.
    pub fn evaluate(&self, t: f64) -> Result<QuadrantPoint> {
        if !(t >= 0.0 && t <= self.t_end()) {
            return Err(Error::Domain(format!(
                "t = {t} outside the computed interval [0, {}]",
                self.t_end()
            )));
        }
        Ok(self.block_at(t).evaluate(t))
    }

    pub fn regime_at(&self, t: f64) -> Regime {
        self.block_at(t).regime()
    }

    /// Times where the trajectory switches representation.
    pub fn handoff_times(&self) -> Vec<f64> {
        self.blocks[..self.blocks.len() - 1]
            .iter()
            .map(Block::t_end)
            .collect()
    }

    /// Left and right limits at each handoff: the end of one block and the
    /// start of the next.
    pub fn handoff_jumps(&self) -> Vec<(f64, f64)> {
        self.blocks
            .windows(2)
            .map(|w| {
                let t = w[0].t_end();
                let left = w[0].evaluate(t);
                let right = w[1].evaluate(w[1].t_start());
                (t, left.distance(&right))
            })
            .collect()
    }

    /// Level `lambda x + mu y` at time `t`.
    pub fn level(&self, t: f64) -> Result<f64> {
        Ok(self.direction.level(&self.evaluate(t)?))
    }

    /// Every stored step endpoint, in time order, without duplicates at handoffs.
    pub fn samples(&self) -> Vec<TrajectorySample> {
        let mut out: Vec<TrajectorySample> = Vec::new();
        for block in &self.blocks {
            let regime = block.regime();
            let mut push = |t: f64, point: QuadrantPoint| {
                if out.last().is_none_or(|s| t > s.t) {
                    out.push(TrajectorySample { t, point, regime });
                }
            };
            match block {
                Block::ClosedForm { cc, t_end } => {
                    push(0.0, QuadrantPoint::CORNER);
                    for k in (0..=8).rev() {
                        let t = t_end * 0.25f64.powi(k);
                        push(t, cc.at(t));
                    }
                }
                Block::Nodes { chart, nodes, .. } => {
                    for n in nodes {
                        push(n.t, chart.point(n.s));
                    }
                }
            }
        }
        out
    }

    /// First time the level `lambda x + mu y` of `dir` reaches `r`, located by
    /// bisection on the dense output, with the point reached.
    pub fn first_crossing(
        &self,
        dir: &Direction,
        r: f64,
        tol: f64,
    ) -> Option<(f64, QuadrantPoint)> {
        let u0 = self.initial_point();
        if dir.level(&u0) >= r {
            return Some((0.0, u0));
        }
        let mut prev_t = 0.0;
        for block in &self.blocks {
            match block {
                Block::ClosedForm { cc, t_end } => {
                    let speed = dir.lambda() * cc.c + dir.mu() * cc.d;
                    let t = (r / speed).powi(2);
                    if t <= *t_end {
                        return Some((t, cc.at(t)));
                    }
                    prev_t = *t_end;
                }
                Block::Nodes { chart, nodes, .. } => {
                    for n in nodes {
                        if dir.level(&chart.point(n.s)) >= r {
                            return Some(bisect(block, dir, r, prev_t, n.t, tol));
                        }
                        prev_t = n.t;
                    }
                }
            }
        }
        None
    }

    /// Exchanges the roles of `x` and `y`.
    pub(crate) fn swapped(self) -> Self {
        Self {
            coeffs: self.coeffs.swapped(),
            direction: self.direction.swapped(),
            blocks: self.blocks.into_iter().map(Block::swapped).collect(),
        }
    }
}

fn bisect(
    block: &Block,
    dir: &Direction,
    r: f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> (f64, QuadrantPoint) {
    let (mut lo, mut hi) = (lo, hi);
    let mut best = (hi, block.evaluate(hi));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let p = block.evaluate(mid);
        let z = dir.level(&p);
        best = (mid, p);
        if (z - r).abs() < tol {
            break;
        }
        if z < r {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_is_exact_for_cubics() {
        // s(t) = t^3 - t, s' = 3 t^2 - 1
        let node = |t: f64| Node {
            t,
            s: [t * t * t - t, 2.0 * t],
            f: [3.0 * t * t - 1.0, 2.0],
            dense: [0.0; 2],
        };
        let (a, b) = (node(0.5), node(2.0));
        for t in [0.5, 0.7, 1.3, 2.0] {
            let s = interpolate(&a, &b, t);
            assert!((s[0] - (t * t * t - t)).abs() < 1e-14);
            assert!((s[1] - 2.0 * t).abs() < 1e-14);
        }
    }

    #[test]
    fn charts_map_states() {
        let edge = Chart::Edge {
            alpha: 2.0,
            gamma: 1.0,
            swapped: false,
        };
        // w = 4 -> x = 2; y = (1*2 + 4) / 2 = 3
        assert_eq!(edge.point([4.0, 4.0]), QuadrantPoint { x: 2.0, y: 3.0 });
        assert_eq!(
            edge.swapped().point([4.0, 4.0]),
            QuadrantPoint { x: 3.0, y: 2.0 }
        );
    }
}
