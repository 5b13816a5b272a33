//! The coefficient quadruple, its regime classification, the monotone
//! direction, and the closed-form quantities of the quadrant system
//!
//! ```text
//!     x' = alpha / x + beta / y
//!     y' = gamma / x + delta / y
//! ```
//!
//! on the nonnegative quadrant.

mod angular;
mod corner;

pub use angular::{angular_derivative, slope_map, slope_ratio, theta, SlopeMap};
pub use corner::{
    contraction_constant, corner_constants, lower_bound_floor, ContractionConstant,
    CornerConstants, CORNER_RESIDUAL_TOL,
};

use serde::Serialize;

use crate::error::{Error, Result};

/// A point of the closed quadrant `x >= 0, y >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadrantPoint {
    pub x: f64,
    pub y: f64,
}

impl QuadrantPoint {
    pub const CORNER: QuadrantPoint = QuadrantPoint { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::Domain(format!("non-finite point ({x}, {y})")));
        }
        if x < 0.0 || y < 0.0 {
            return Err(Error::Domain(format!(
                "point ({x}, {y}) lies outside the nonnegative quadrant"
            )));
        }
        Ok(Self { x, y })
    }

    pub fn is_corner(&self) -> bool {
        self.x == 0.0 && self.y == 0.0
    }

    /// Both coordinates strictly positive.
    pub fn is_interior(&self) -> bool {
        self.x > 0.0 && self.y > 0.0
    }

    pub fn swapped(&self) -> Self {
        Self {
            x: self.y,
            y: self.x,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            x: self.x * factor,
            y: self.y * factor,
        }
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// The coefficient quadruple `(alpha, beta, gamma, delta)` with `alpha, delta > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficients {
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
}

impl Coefficients {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        if ![alpha, beta, gamma, delta].iter().all(|v| v.is_finite()) {
            return Err(Error::Domain(format!(
                "coefficients must be finite, got ({alpha}, {beta}, {gamma}, {delta})"
            )));
        }
        if alpha <= 0.0 {
            return Err(Error::Domain(format!(
                "alpha must be strictly positive, got {alpha}"
            )));
        }
        if delta <= 0.0 {
            return Err(Error::Domain(format!(
                "delta must be strictly positive, got {delta}"
            )));
        }
        Ok(Self {
            alpha,
            beta,
            gamma,
            delta,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The coefficients of the system with the roles of `x` and `y` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            alpha: self.delta,
            beta: self.gamma,
            gamma: self.beta,
            delta: self.alpha,
        }
    }

    /// `alpha * delta - beta * gamma`.
    pub fn determinant(&self) -> f64 {
        self.alpha * self.delta - self.beta * self.gamma
    }

    /// `sqrt((beta - gamma)^2 + 4 alpha delta)`.
    pub fn discriminant_root(&self) -> f64 {
        let diff = self.beta - self.gamma;
        (diff * diff + 4.0 * self.alpha * self.delta).sqrt()
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.alpha
            .abs()
            .max(self.beta.abs())
            .max(self.gamma.abs())
            .max(self.delta.abs())
    }

    /// Fails unless hypothesis (H) holds.
    pub fn require_hypothesis(&self) -> Result<()> {
        match classify(self).tag() {
            ClassificationTag::HypothesisH => Ok(()),
            tag => Err(Error::Classification(tag)),
        }
    }
}

/// Classification outcome without payload; used in errors and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassificationTag {
    HypothesisH,
    DegenerateLine,
    NoGlobalSolution,
}

impl ClassificationTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClassificationTag::HypothesisH => "hypothesis_h",
            ClassificationTag::DegenerateLine => "degenerate_line",
            ClassificationTag::NoGlobalSolution => "no_global_solution",
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            ClassificationTag::HypothesisH => "hypothesis (H) holds",
            ClassificationTag::DegenerateLine => {
                "degenerate line (alpha*delta = beta*gamma, beta, gamma < 0)"
            }
            ClassificationTag::NoGlobalSolution => {
                "no global solution (alpha*delta < beta*gamma, beta, gamma < 0)"
            }
        }
    }
}

/// Regime of a coefficient quadruple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Classification {
    HypothesisH,
    /// Solutions keep `v = a * y + b * x` constant, with `(a, b) = (alpha, -gamma)`.
    /// From a start `(x, y) != 0` the solution converges to
    /// `((gamma x - alpha y) / (beta + gamma), (beta y - delta x) / (beta + gamma))`;
    /// that limit is recorded here but not asserted anywhere.
    DegenerateLine {
        conserved: (f64, f64),
    },
    NoGlobalSolution,
}

impl Classification {
    pub fn tag(&self) -> ClassificationTag {
        match self {
            Classification::HypothesisH => ClassificationTag::HypothesisH,
            Classification::DegenerateLine { .. } => ClassificationTag::DegenerateLine,
            Classification::NoGlobalSolution => ClassificationTag::NoGlobalSolution,
        }
    }
}

/// Classifies the coefficients. The comparison of `alpha*delta` with
/// `beta*gamma` is exact on the given floats.
pub fn classify(coeffs: &Coefficients) -> Classification {
    let Coefficients {
        alpha,
        beta,
        gamma,
        delta,
    } = *coeffs;
    if beta >= 0.0 || gamma >= 0.0 {
        return Classification::HypothesisH;
    }
    let ad = alpha * delta;
    let bg = beta * gamma;
    if bg < ad {
        Classification::HypothesisH
    } else if bg == ad {
        Classification::DegenerateLine {
            conserved: (alpha, -gamma),
        }
    } else {
        Classification::NoGlobalSolution
    }
}

/// A strictly positive pair `(lambda, mu)` for which `lambda*x + mu*y`
/// increases along every solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Direction {
    lambda: f64,
    mu: f64,
}

impl Direction {
    /// Validates a user-supplied pair against the coefficients.
    pub fn new(coeffs: &Coefficients, lambda: f64, mu: f64) -> Result<Self> {
        coeffs.require_hypothesis()?;
        if !(lambda.is_finite() && mu.is_finite() && lambda > 0.0 && mu > 0.0) {
            return Err(Error::Domain(format!(
                "direction must be strictly positive, got ({lambda}, {mu})"
            )));
        }
        let dir = Self { lambda, mu };
        let (p, q) = dir.images(coeffs);
        if p <= 0.0 || q <= 0.0 {
            return Err(Error::Domain(format!(
                "direction ({lambda}, {mu}) is not increasing: lambda*alpha + mu*gamma = {p}, lambda*beta + mu*delta = {q}"
            )));
        }
        Ok(dir)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn swapped(&self) -> Self {
        Self {
            lambda: self.mu,
            mu: self.lambda,
        }
    }

    /// `lambda * x + mu * y`.
    pub fn level(&self, p: &QuadrantPoint) -> f64 {
        self.lambda * p.x + self.mu * p.y
    }

    /// `(lambda*alpha + mu*gamma, lambda*beta + mu*delta)`.
    pub fn images(&self, coeffs: &Coefficients) -> (f64, f64) {
        (
            self.lambda * coeffs.alpha + self.mu * coeffs.gamma,
            self.lambda * coeffs.beta + self.mu * coeffs.delta,
        )
    }

    /// `lambda (lambda alpha + mu gamma) + mu (lambda beta + mu delta)`: the
    /// rate in the lower bound `z^2 >= z0^2 + 2 Q t` on the level function.
    pub fn growth_rate(&self, coeffs: &Coefficients) -> f64 {
        let (p, q) = self.images(coeffs);
        self.lambda * p + self.mu * q
    }

    /// Upper bound on the first time the level function reaches `r`.
    pub fn hitting_time_bound(&self, coeffs: &Coefficients, r: f64) -> f64 {
        r * r / (2.0 * self.growth_rate(coeffs))
    }
}

/// Picks a deterministic direction for coefficients satisfying (H).
pub fn find_direction(coeffs: &Coefficients) -> Result<Direction> {
    coeffs.require_hypothesis()?;
    let Coefficients {
        alpha,
        beta,
        gamma,
        delta,
    } = *coeffs;
    let (lambda, mu) = match (beta >= 0.0, gamma >= 0.0) {
        (true, true) => (1.0, 1.0),
        // lambda * alpha + gamma = alpha > 0
        (true, false) => (1.0 - gamma / alpha, 1.0),
        // lambda * beta + delta = delta / 2 > 0
        (false, true) => (delta / (-2.0 * beta), 1.0),
        // feasible lambda interval at mu = 1 is (-gamma/alpha, delta/(-beta))
        (false, false) => (0.5 * (-gamma / alpha + delta / -beta), 1.0),
    };
    Direction::new(coeffs, lambda, mu).map_err(|e| {
        Error::Internal(format!(
            "direction rule produced an infeasible pair for {coeffs:?}: {e}"
        ))
    })
}

/// The right-hand side `(alpha/x + beta/y, gamma/x + delta/y)`, defined
/// only at interior points.
pub fn vector_field(coeffs: &Coefficients, p: &QuadrantPoint) -> Result<(f64, f64)> {
    if !p.is_interior() {
        return Err(Error::Domain(format!(
            "vector field is singular on the boundary, got ({}, {})",
            p.x, p.y
        )));
    }
    Ok(raw_field(coeffs, p.x, p.y))
}

#[inline]
pub(crate) fn raw_field(coeffs: &Coefficients, x: f64, y: f64) -> (f64, f64) {
    let ix = 1.0 / x;
    let iy = 1.0 / y;
    (
        coeffs.alpha * ix + coeffs.beta * iy,
        coeffs.gamma * ix + coeffs.delta * iy,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn co(a: f64, b: f64, g: f64, d: f64) -> Coefficients {
        Coefficients::new(a, b, g, d).unwrap()
    }

    #[test]
    fn rejects_nonpositive_alpha_and_delta() {
        let err = Coefficients::new(0.0, 1.0, 1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("alpha"));
        let err = Coefficients::new(1.0, 1.0, 1.0, -2.0).unwrap_err();
        assert!(err.to_string().contains("delta"));
        assert!(Coefficients::new(f64::NAN, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn classification_examples() {
        assert_eq!(
            classify(&co(1.0, 1.0, 1.0, 1.0)),
            Classification::HypothesisH
        );
        assert_eq!(
            classify(&co(1.0, -2.0, -1.0, 1.0)),
            Classification::NoGlobalSolution
        );
        assert_eq!(
            classify(&co(1.0, -1.0, -1.0, 1.0)),
            Classification::DegenerateLine {
                conserved: (1.0, 1.0)
            }
        );
        // both negative but strictly below the determinant
        assert_eq!(
            classify(&co(2.0, -1.0, -1.0, 1.0)),
            Classification::HypothesisH
        );
        // mixed signs are always (H)
        assert_eq!(
            classify(&co(1.0, -9.0, 0.0, 1.0)),
            Classification::HypothesisH
        );
    }

    #[test]
    fn direction_examples() {
        let d = find_direction(&co(1.0, 1.0, 1.0, 1.0)).unwrap();
        assert_eq!((d.lambda(), d.mu()), (1.0, 1.0));

        let c = co(1.0, -1.0, 2.0, 1.0);
        let d = find_direction(&c).unwrap();
        assert_eq!((d.lambda(), d.mu()), (0.5, 1.0));
        assert_eq!(d.images(&c), (2.5, 0.5));

        let c = co(1.0, 2.0, -3.0, 1.0);
        let d = find_direction(&c).unwrap();
        assert_eq!((d.lambda(), d.mu()), (4.0, 1.0));
        assert_eq!(d.images(&c), (1.0, 9.0));
    }

    #[test]
    fn direction_both_negative_is_midpoint() {
        let c = co(2.0, -1.0, -1.0, 1.0);
        let d = find_direction(&c).unwrap();
        // interval (1/2, 1)
        assert_eq!(d.lambda(), 0.75);
        let (p, q) = d.images(&c);
        assert!(p > 0.0 && q > 0.0);
    }

    #[test]
    fn direction_requires_hypothesis() {
        let err = find_direction(&co(1.0, -2.0, -1.0, 1.0)).unwrap_err();
        assert_eq!(
            err,
            Error::Classification(ClassificationTag::NoGlobalSolution)
        );
        let err = find_direction(&co(1.0, -1.0, -1.0, 1.0)).unwrap_err();
        assert_eq!(
            err,
            Error::Classification(ClassificationTag::DegenerateLine)
        );
    }

    #[test]
    fn user_direction_is_validated() {
        let c = co(1.0, 2.0, -3.0, 1.0);
        assert!(Direction::new(&c, 1.0, 1.0).is_err());
        assert!(Direction::new(&c, 4.0, 1.0).is_ok());
        assert!(Direction::new(&c, -1.0, 1.0).is_err());
    }

    #[test]
    fn vector_field_examples() {
        let p = |x, y| QuadrantPoint::new(x, y).unwrap();
        assert_eq!(
            vector_field(&co(1.0, 0.0, 0.0, 1.0), &p(1.0, 1.0)).unwrap(),
            (1.0, 1.0)
        );
        assert_eq!(
            vector_field(&co(1.0, 1.0, 1.0, 1.0), &p(2.0, 1.0)).unwrap(),
            (1.5, 1.5)
        );
        assert_eq!(
            vector_field(&co(2.0, 1.0, 0.0, 1.0), &p(1.0, 2.0)).unwrap(),
            (2.5, 0.5)
        );
        assert!(matches!(
            vector_field(&co(1.0, 0.0, 0.0, 1.0), &p(0.0, 1.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn hitting_bound_decoupled() {
        let c = co(1.0, 0.0, 0.0, 1.0);
        let d = find_direction(&c).unwrap();
        assert_eq!(d.growth_rate(&c), 2.0);
        assert_eq!(d.hitting_time_bound(&c, 2.0), 1.0);
    }

    #[test]
    fn point_validation() {
        assert!(QuadrantPoint::new(-1e-300, 1.0).is_err());
        assert!(QuadrantPoint::new(0.0, 0.0).unwrap().is_corner());
        assert!(!QuadrantPoint::new(0.0, 1.0).unwrap().is_interior());
    }
}
