use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use super::{Coefficients, QuadrantPoint};
use crate::error::{Error, Result};

/// `beta - gamma + sqrt((beta - gamma)^2 + 4 alpha delta)`, computed without
/// cancellation. Always positive.
pub(crate) fn plus_branch(coeffs: &Coefficients) -> f64 {
    let diff = coeffs.beta() - coeffs.gamma();
    let root = coeffs.discriminant_root();
    if diff >= 0.0 {
        diff + root
    } else {
        4.0 * coeffs.alpha() * coeffs.delta() / (root - diff)
    }
}

/// `gamma - beta + sqrt((beta - gamma)^2 + 4 alpha delta)`.
pub(crate) fn minus_branch(coeffs: &Coefficients) -> f64 {
    plus_branch(&coeffs.swapped())
}

/// Slope `d / c` of the invariant ray, from the closed form
/// `(gamma - beta + sqrt((beta - gamma)^2 + 4 alpha delta)) / (2 alpha)`.
pub fn slope_ratio(coeffs: &Coefficients) -> f64 {
    minus_branch(coeffs) / (2.0 * coeffs.alpha())
}

/// Polar angle `arctan(y / x)` on the punctured quadrant, `pi/2` on the
/// `y` axis and `0` on the `x` axis.
pub fn theta(p: &QuadrantPoint) -> Result<f64> {
    if p.is_corner() {
        return Err(Error::Domain("angle is undefined at the corner".into()));
    }
    if p.x == 0.0 {
        return Ok(FRAC_PI_2);
    }
    Ok(p.y.atan2(p.x))
}

/// Time derivative of `theta(u(t))` at an interior point, in the factored
/// form `(d/c - y/x) [alpha + x (beta - gamma + root) / (2 y)] / (x^2 + y^2)`.
pub fn angular_derivative(coeffs: &Coefficients, p: &QuadrantPoint) -> Result<f64> {
    if !p.is_interior() {
        return Err(Error::Domain(format!(
            "angular derivative requires an interior point, got ({}, {})",
            p.x, p.y
        )));
    }
    let gap = slope_ratio(coeffs) - p.y / p.x;
    let bracket = coeffs.alpha() + p.x * plus_branch(coeffs) / (2.0 * p.y);
    Ok(gap * bracket / (p.x * p.x + p.y * p.y))
}

/// Value and derivative of `h(z) = (gamma z + delta) / (alpha z + beta)`,
/// the velocity slope `y'/x'` as a function of the position slope `y/x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeMap {
    pub h: f64,
    pub dh: f64,
}

pub fn slope_map(coeffs: &Coefficients, z: f64) -> Result<SlopeMap> {
    if z.is_nan() || z < 0.0 {
        return Err(Error::Domain(format!(
            "slope map needs z in [0, inf], got {z}"
        )));
    }
    if z.is_infinite() {
        return Ok(SlopeMap {
            h: coeffs.gamma() / coeffs.alpha(),
            dh: 0.0,
        });
    }
    let denom = coeffs.alpha() * z + coeffs.beta();
    if denom == 0.0 {
        return Err(Error::Pole(z));
    }
    Ok(SlopeMap {
        h: (coeffs.gamma() * z + coeffs.delta()) / denom,
        dh: -coeffs.determinant() / (denom * denom),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{corner_constants, find_direction};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    fn co(a: f64, b: f64, g: f64, d: f64) -> Coefficients {
        Coefficients::new(a, b, g, d).unwrap()
    }

    fn pt(x: f64, y: f64) -> QuadrantPoint {
        QuadrantPoint::new(x, y).unwrap()
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta(&pt(1.0, 1.0)).unwrap(), FRAC_PI_4);
        assert_eq!(theta(&pt(0.0, 3.0)).unwrap(), FRAC_PI_2);
        assert_eq!(theta(&pt(2.0, 0.0)).unwrap(), 0.0);
        assert!(theta(&QuadrantPoint::CORNER).is_err());
    }

    #[test]
    fn angular_examples() {
        let c = co(1.0, 0.0, 0.0, 1.0);
        assert_eq!(angular_derivative(&c, &pt(1.0, 1.0)).unwrap(), 0.0);
        assert!(angular_derivative(&c, &pt(1.0, 2.0)).unwrap() < 0.0);
        assert!(angular_derivative(&c, &pt(2.0, 1.0)).unwrap() > 0.0);
        assert!(angular_derivative(&c, &pt(0.0, 1.0)).is_err());
    }

    #[test]
    fn angular_matches_direct_quotient_rule() {
        // (x y' - y x') / (x^2 + y^2) with the raw field
        let c = co(1.5, -0.7, 2.0, 0.4);
        for (x, y) in [(0.3, 1.2), (2.0, 0.1), (1.0, 1.0)] {
            let (fx, fy) = crate::system::raw_field(&c, x, y);
            let direct = (x * fy - y * fx) / (x * x + y * y);
            let factored = angular_derivative(&c, &pt(x, y)).unwrap();
            assert!((direct - factored).abs() < 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn slope_map_examples() {
        let m = slope_map(&co(1.0, 1.0, 1.0, 1.0), 3.0).unwrap();
        assert_eq!((m.h, m.dh), (1.0, 0.0));

        let m = slope_map(&co(2.0, 1.0, 0.0, 1.0), 0.5).unwrap();
        assert_eq!(m.h, 0.5);

        let m = slope_map(&co(1.0, 2.0, 0.5, 1.0), 0.5).unwrap();
        assert_eq!((m.h, m.dh), (0.5, 0.0));

        let m = slope_map(&co(2.0, 1.0, 3.0, 1.0), f64::INFINITY).unwrap();
        assert_eq!(m.h, 1.5);
    }

    #[test]
    fn slope_map_pole() {
        assert_eq!(
            slope_map(&co(1.0, -2.0, 1.0, 1.0), 2.0),
            Err(Error::Pole(2.0))
        );
        assert!(slope_map(&co(1.0, 1.0, 1.0, 1.0), -1.0).is_err());
    }

    fn hypothesis_coeffs() -> impl Strategy<Value = Coefficients> {
        (1e-3..5.0f64, -5.0..5.0f64, -5.0..5.0f64, 1e-3..5.0f64)
            .prop_map(|(a, b, g, d)| Coefficients::new(a, b, g, d).unwrap())
            .prop_filter("(H)", |c| c.require_hypothesis().is_ok())
    }

    proptest! {
        #[test]
        fn h_fixes_invariant_slope(c in hypothesis_coeffs()) {
            let m = slope_ratio(&c);
            prop_assume!(c.alpha() * m + c.beta() != 0.0);
            let s = slope_map(&c, m).unwrap();
            prop_assert!((s.h - m).abs() <= 1e-12 * m);
        }

        #[test]
        fn dh_sign_follows_determinant(c in hypothesis_coeffs(), z in 0.0..20.0f64) {
            prop_assume!(c.alpha() * z + c.beta() != 0.0);
            let s = slope_map(&c, z).unwrap();
            prop_assert_eq!(s.dh.signum(), (-c.determinant()).signum());
        }

        #[test]
        fn angular_trichotomy(c in hypothesis_coeffs(), x in 1e-3..10.0f64, y in 1e-3..10.0f64) {
            let cc = corner_constants(&c, &find_direction(&c).unwrap()).unwrap();
            let p = QuadrantPoint::new(x, y).unwrap();
            let rate = angular_derivative(&c, &p).unwrap();
            let gap = cc.theta_star() - theta(&p).unwrap();
            // sign is only meaningful away from the ray
            prop_assume!(gap.abs() > 1e-12);
            prop_assert_eq!(rate.signum(), gap.signum());
        }
    }
}
