use serde::Serialize;

use super::report::{Criterion, PropertyReport};
use crate::error::{Error, Result};

/// Continuous piecewise-linear function given by its breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseLinear {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinear {
    /// `times` must start at 0 and increase strictly.
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(Error::Domain(
                "need at least two breakpoints and one value per breakpoint".into(),
            ));
        }
        if times[0] != 0.0 {
            return Err(Error::Domain(format!(
                "first breakpoint must be 0, got {}",
                times[0]
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0]))
            || !times.iter().chain(&values).all(|v| v.is_finite())
        {
            return Err(Error::Domain(
                "breakpoints must be finite and strictly increasing".into(),
            ));
        }
        Ok(Self { times, values })
    }

    pub fn constant(value: f64, t_end: f64) -> Result<Self> {
        Self::new(vec![0.0, t_end], vec![value, value])
    }

    pub fn linear(v0: f64, slope: f64, t_end: f64) -> Result<Self> {
        Self::new(vec![0.0, t_end], vec![v0, v0 + slope * t_end])
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.times
    }

    fn segment(&self, t: f64) -> usize {
        self.times
            .partition_point(|&s| s <= t)
            .clamp(1, self.times.len() - 1)
            - 1
    }

    pub fn value(&self, t: f64) -> f64 {
        let i = self.segment(t);
        self.values[i] + self.slope_at(t) * (t - self.times[i])
    }

    /// Slope of the segment containing `t` (right-continuous).
    pub fn slope_at(&self, t: f64) -> f64 {
        let i = self.segment(t);
        (self.values[i + 1] - self.values[i]) / (self.times[i + 1] - self.times[i])
    }
}

const SUBSTEPS: usize = 16;
const COMPARISON_TOL: f64 = 1e-9;

/// Solves `w' = 2 alpha + 2 sqrt(w) v'` from `w = v(0)^2` through `knots`
/// (which include every breakpoint of `v`) and returns `x = sqrt(w)` there.
fn scalar_solution(alpha: f64, v: &PiecewiseLinear, knots: &[f64]) -> Vec<f64> {
    let mut w = v.value(0.0).powi(2);
    let mut out = vec![w.sqrt()];
    for pair in knots.windows(2) {
        let slope = v.slope_at(pair[0]);
        let rhs = |w: f64| 2.0 * alpha + 2.0 * w.max(0.0).sqrt() * slope;
        let h = (pair[1] - pair[0]) / SUBSTEPS as f64;
        for _ in 0..SUBSTEPS {
            let k1 = rhs(w);
            let k2 = rhs(w + 0.5 * h * k1);
            let k3 = rhs(w + 0.5 * h * k2);
            let k4 = rhs(w + h * k3);
            w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        out.push(w.max(0.0).sqrt());
    }
    out
}

/// Comparison principle for `x = v + alpha * int_0^t ds / x`: with
/// `0 <= v1(0) <= v2(0)` and `v2 - v1` nondecreasing, `x1 <= x2 + 1e-9` on a
/// uniform grid of `grid_points` times in `[0, t_end]`.
pub fn check_comparison(
    alpha: f64,
    v1: &PiecewiseLinear,
    v2: &PiecewiseLinear,
    t_end: f64,
    grid_points: usize,
) -> Result<PropertyReport> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Domain(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if !(t_end > 0.0 && t_end <= v1.end() && t_end <= v2.end()) {
        return Err(Error::Precondition(format!(
            "t_end = {t_end} must be positive and covered by both inputs"
        )));
    }
    if grid_points < 2 {
        return Err(Error::Domain("need at least two grid points".into()));
    }
    let (a, b) = (v1.value(0.0), v2.value(0.0));
    if !(0.0 <= a && a <= b) {
        return Err(Error::Precondition(format!(
            "need 0 <= v1(0) <= v2(0), got {a} and {b}"
        )));
    }

    let grid: Vec<f64> = (0..grid_points)
        .map(|i| t_end * i as f64 / (grid_points - 1) as f64)
        .collect();
    let mut knots: Vec<f64> = grid
        .iter()
        .chain(v1.breakpoints())
        .chain(v2.breakpoints())
        .copied()
        .filter(|&t| t <= t_end)
        .collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    let gap = |t: f64| v2.value(t) - v1.value(t);
    if knots.windows(2).any(|w| gap(w[1]) < gap(w[0])) {
        return Err(Error::Precondition("v2 - v1 is not nondecreasing".into()));
    }

    let x1 = scalar_solution(alpha, v1, &knots);
    let x2 = scalar_solution(alpha, v2, &knots);
    let mut worst = f64::NEG_INFINITY;
    let mut j = 0;
    for &t in &grid {
        while knots[j] < t {
            j += 1;
        }
        worst = worst.max(x1[j] - x2[j]);
    }
    Ok(PropertyReport::new(
        "comparison",
        worst,
        COMPARISON_TOL,
        Criterion::AtMost,
        grid.len(),
    )
    .with_param("alpha", alpha)
    .with_param("t_end", t_end))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piecewise_linear_evaluation() {
        let v = PiecewiseLinear::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 1.0]).unwrap();
        assert_eq!(v.value(0.5), 1.0);
        assert_eq!(v.value(2.0), 1.5);
        assert_eq!(v.slope_at(1.0), -0.5);
        assert_eq!(v.slope_at(0.0), 2.0);
        assert!(PiecewiseLinear::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(PiecewiseLinear::new(vec![0.5, 1.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn equal_inputs_give_equal_solutions() {
        let v = PiecewiseLinear::new(vec![0.0, 0.4, 1.0], vec![0.5, 0.9, 0.6]).unwrap();
        let r = check_comparison(1.0, &v, &v, 1.0, 100).unwrap();
        assert_eq!(r.margin, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn forcing_cases() {
        let zero = PiecewiseLinear::constant(0.0, 1.0).unwrap();
        let ramp = PiecewiseLinear::linear(0.0, 1.0, 1.0).unwrap();
        let one = PiecewiseLinear::constant(1.0, 1.0).unwrap();
        for v2 in [&ramp, &one] {
            let r = check_comparison(1.0, &zero, v2, 1.0, 1000).unwrap();
            assert!(r.pass, "{r}");
            assert!(r.margin <= 0.0);
        }
        // with v = 0 the solution is sqrt(2 alpha t)
        let knots = [0.0, 0.5, 1.0];
        let x = scalar_solution(1.0, &zero, &knots);
        assert!((x[2] - 2f64.sqrt()).abs() < 1e-14);
        // v = 1 gives x' = 1 / x from x = 1
        let x = scalar_solution(1.0, &one, &knots);
        assert!((x[2] - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn preconditions_are_checked() {
        let zero = PiecewiseLinear::constant(0.0, 1.0).unwrap();
        let one = PiecewiseLinear::constant(1.0, 1.0).unwrap();
        let down = PiecewiseLinear::linear(1.0, -0.5, 1.0).unwrap();
        assert!(matches!(
            check_comparison(1.0, &one, &zero, 1.0, 10),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            check_comparison(1.0, &zero, &down, 1.0, 10),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            check_comparison(1.0, &zero, &one, 2.0, 10),
            Err(Error::Precondition(_))
        ));
    }
}
