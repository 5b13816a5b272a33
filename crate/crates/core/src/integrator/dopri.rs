//! Adaptive Dormand-Prince 5(4) stepping with embedded error control.

use super::fields::PlanarField;
use super::trajectory::Node;
use super::IntegratorConfig;
use crate::error::{Error, Result};

#[cfg(test)]
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// Fifth-order solution minus the embedded fourth-order one.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Continuous extension weights.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const MAX_STEPS: usize = 2_000_000;

/// What to do after an accepted step.
pub(crate) enum Control {
    Continue,
    Stop,
}

pub(crate) struct Run {
    pub nodes: Vec<Node>,
    pub stopped: bool,
}

struct Trial {
    s: [f64; 2],
    f: [f64; 2],
    dense: [f64; 2],
    err: f64,
}

fn attempt<F: PlanarField>(
    field: &F,
    s: [f64; 2],
    f0: [f64; 2],
    h: f64,
    cfg: &IntegratorConfig,
) -> Option<Trial> {
    let mut k = [[0.0; 2]; 7];
    k[0] = f0;
    for stage in 1..7 {
        let mut y = s;
        for (j, kj) in k.iter().enumerate().take(stage) {
            let a = A[stage][j];
            if a != 0.0 {
                y[0] += h * a * kj[0];
                y[1] += h * a * kj[1];
            }
        }
        if !field.admissible(y) {
            return None;
        }
        k[stage] = field.eval(y);
        if stage == 6 {
            // FSAL: the last stage state is the fifth-order solution
            let mut err = 0.0f64;
            for i in 0..2 {
                let e: f64 = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
                let scale = cfg.abs_tol + cfg.rel_tol * s[i].abs().max(y[i].abs());
                err = err.max((e / scale).abs());
            }
            if !err.is_finite() {
                return None;
            }
            let mut dense = [0.0; 2];
            for (i, d) in dense.iter_mut().enumerate() {
                *d = h * (0..7).map(|j| D[j] * k[j][i]).sum::<f64>();
            }
            return Some(Trial {
                s: y,
                f: k[6],
                dense,
                err,
            });
        }
    }
    unreachable!("loop returns at the final stage")
}

/// The fifth-order solution after a single step of size `h` from `(s, f)`,
/// or `None` if a stage leaves the admissible region.
pub(crate) fn partial_step<F: PlanarField>(
    field: &F,
    s: [f64; 2],
    f: [f64; 2],
    h: f64,
) -> Option<[f64; 2]> {
    let mut k = [[0.0; 2]; 6];
    k[0] = f;
    let mut y = s;
    for stage in 1..7 {
        y = s;
        for (j, kj) in k.iter().enumerate().take(stage) {
            let a = A[stage][j];
            if a != 0.0 {
                y[0] += h * a * kj[0];
                y[1] += h * a * kj[1];
            }
        }
        if !field.admissible(y) {
            return None;
        }
        if stage < 6 {
            k[stage] = field.eval(y);
        }
    }
    Some(y)
}

/// Integrates `field` from `(t0, s0)` to `t_end`, calling `control` after
/// every accepted step.
pub(crate) fn integrate<F: PlanarField>(
    field: &F,
    t0: f64,
    s0: [f64; 2],
    t_end: f64,
    cfg: &IntegratorConfig,
    mut control: impl FnMut(f64, [f64; 2]) -> Result<Control>,
) -> Result<Run> {
    let mut t = t0;
    let mut s = s0;
    let mut f = field.eval(s);
    let mut nodes = vec![Node {
        t,
        s,
        f,
        dense: [0.0; 2],
    }];
    let mut h = cfg.initial_step.min(t_end - t0);
    let mut steps = 0usize;
    let mut rejected = false;

    while t < t_end {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::StepFailure {
                t,
                reason: format!("exceeded {MAX_STEPS} step attempts"),
            });
        }
        h = h.min(cfg.max_step).min(field.step_cap(s));
        let remaining = t_end - t;
        let last = h >= remaining * (1.0 - 1e-12);
        if last {
            h = remaining;
        }
        if !(h > 4.0 * f64::EPSILON * t.abs()) || h <= f64::MIN_POSITIVE {
            return Err(Error::StepFailure {
                t,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }

        let Some(trial) = attempt(field, s, f, h, cfg) else {
            h *= 0.25;
            rejected = true;
            continue;
        };

        if trial.err <= 1.0 {
            t = if last { t_end } else { t + h };
            s = trial.s;
            f = trial.f;
            nodes.push(Node {
                t,
                s,
                f,
                dense: trial.dense,
            });
            let mut factor = if trial.err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * trial.err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if rejected {
                factor = factor.min(1.0);
            }
            rejected = false;
            h *= factor;
            if let Control::Stop = control(t, s)? {
                return Ok(Run {
                    nodes,
                    stopped: true,
                });
            }
        } else {
            h *= (SAFETY * trial.err.powf(-0.2)).max(MIN_FACTOR);
            rejected = true;
        }
    }
    Ok(Run {
        nodes,
        stopped: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::QuadrantPoint;

    /// x' = -x, y' = 2 y
    struct Linear;

    impl PlanarField for Linear {
        fn eval(&self, s: [f64; 2]) -> [f64; 2] {
            [-s[0], 2.0 * s[1]]
        }
        fn admissible(&self, _s: [f64; 2]) -> bool {
            true
        }
        fn to_point(&self, s: [f64; 2]) -> QuadrantPoint {
            QuadrantPoint { x: s[0], y: s[1] }
        }
    }

    #[test]
    fn tableau_rows_sum_to_nodes() {
        for (row, c) in A.iter().zip(C) {
            let sum: f64 = row.iter().sum();
            assert!((sum - c).abs() < 1e-15);
        }
        assert!(E.iter().sum::<f64>().abs() < 1e-15);
    }

    #[test]
    fn linear_system_to_tolerance() {
        let cfg = IntegratorConfig::default();
        let run = integrate(&Linear, 0.0, [1.0, 1.0], 2.0, &cfg, |_, _| {
            Ok(Control::Continue)
        })
        .unwrap();
        let last = run.nodes.last().unwrap();
        assert_eq!(last.t, 2.0);
        assert!((last.s[0] - (-2.0f64).exp()).abs() < 1e-10);
        assert!((last.s[1] - 4.0f64.exp()).abs() < 1e-8 * 4.0f64.exp());
        assert!(!run.stopped);
    }

    #[test]
    fn control_can_stop() {
        let cfg = IntegratorConfig::default();
        let run = integrate(&Linear, 0.0, [1.0, 1.0], 10.0, &cfg, |_, s| {
            Ok(if s[1] > 5.0 {
                Control::Stop
            } else {
                Control::Continue
            })
        })
        .unwrap();
        assert!(run.stopped);
        assert!(run.nodes.last().unwrap().t < 10.0);
    }
}
