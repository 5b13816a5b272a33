//! Right-hand sides integrated in each regime. Both the adaptive and the
//! fixed-step reference solvers evaluate these; neither step controller
//! lives here.

use crate::system::{raw_field, Coefficients, QuadrantPoint};

/// A planar autonomous system in some chart of the quadrant.
pub(crate) trait PlanarField {
    fn eval(&self, s: [f64; 2]) -> [f64; 2];

    /// Whether a stage state may be fed to `eval`.
    fn admissible(&self, s: [f64; 2]) -> bool;

    /// Largest step allowed from `s`, independent of accuracy.
    fn step_cap(&self, _s: [f64; 2]) -> f64 {
        f64::INFINITY
    }

    /// The quadrant point represented by `s` (in the frame of the field).
    fn to_point(&self, s: [f64; 2]) -> QuadrantPoint;
}

/// Fraction of `min(x, y)` a single interior step may travel.
const POSITIVITY_SAFETY: f64 = 0.5;

/// The original system in `(x, y)`.
pub(crate) struct InteriorField {
    coeffs: Coefficients,
    max_abs: f64,
}

impl InteriorField {
    pub(crate) fn new(coeffs: Coefficients) -> Self {
        Self {
            coeffs,
            max_abs: coeffs.max_abs(),
        }
    }
}

impl PlanarField for InteriorField {
    fn eval(&self, s: [f64; 2]) -> [f64; 2] {
        let (fx, fy) = raw_field(&self.coeffs, s[0], s[1]);
        [fx, fy]
    }

    fn admissible(&self, s: [f64; 2]) -> bool {
        s[0] > 0.0 && s[1] > 0.0 && s[0].is_finite() && s[1].is_finite()
    }

    fn step_cap(&self, s: [f64; 2]) -> f64 {
        let speed = self.max_abs * (1.0 / s[0] + 1.0 / s[1]);
        POSITIVITY_SAFETY * s[0].min(s[1]) / speed
    }

    fn to_point(&self, s: [f64; 2]) -> QuadrantPoint {
        QuadrantPoint { x: s[0], y: s[1] }
    }
}

/// The regularized squared-variable system for starts on the `y` axis.
///
/// State is `(w, z)` with `w = x^2` and `z = alpha y - gamma x`:
///
/// ```text
///     w' = 2 alpha + 2 sqrt(w) alpha beta psi
///     z' = alpha (alpha delta - beta gamma) psi
///     psi = 1 / max(gamma sqrt(w) + z, alpha eps)
/// ```
pub(crate) struct EdgeField {
    alpha: f64,
    beta: f64,
    gamma: f64,
    det: f64,
    cap: f64,
}

impl EdgeField {
    pub(crate) fn new(coeffs: &Coefficients, epsilon: f64) -> Self {
        Self {
            alpha: coeffs.alpha(),
            beta: coeffs.beta(),
            gamma: coeffs.gamma(),
            det: coeffs.determinant(),
            cap: coeffs.alpha() * epsilon,
        }
    }

    /// `gamma x + z`, which equals `alpha y`.
    pub(crate) fn capped_quantity(&self, s: [f64; 2]) -> f64 {
        self.gamma * s[0].max(0.0).sqrt() + s[1]
    }

    /// `alpha * eps`.
    pub(crate) fn cap(&self) -> f64 {
        self.cap
    }

    pub(crate) fn initial_state(coeffs: &Coefficients, y0: f64) -> [f64; 2] {
        [0.0, coeffs.alpha() * y0]
    }

    #[cfg(test)]
    pub(crate) fn state_of(coeffs: &Coefficients, p: &QuadrantPoint) -> [f64; 2] {
        [p.x * p.x, coeffs.alpha() * p.y - coeffs.gamma() * p.x]
    }
}

impl PlanarField for EdgeField {
    fn eval(&self, s: [f64; 2]) -> [f64; 2] {
        let x = s[0].max(0.0).sqrt();
        let psi = 1.0 / (self.gamma * x + s[1]).max(self.cap);
        [
            2.0 * self.alpha + 2.0 * x * self.alpha * self.beta * psi,
            self.alpha * self.det * psi,
        ]
    }

    fn admissible(&self, s: [f64; 2]) -> bool {
        s[0] >= 0.0 && s[0].is_finite() && s[1].is_finite()
    }

    fn to_point(&self, s: [f64; 2]) -> QuadrantPoint {
        edge_point(self.alpha, self.gamma, s)
    }
}

pub(crate) fn edge_point(alpha: f64, gamma: f64, s: [f64; 2]) -> QuadrantPoint {
    let x = s[0].max(0.0).sqrt();
    QuadrantPoint {
        x,
        y: ((gamma * x + s[1]) / alpha).max(0.0),
    }
}
