//! Solver and verification suite for the singular planar system
//!
//! ```text
//!     x' = alpha / x + beta / y
//!     y' = gamma / x + delta / y
//! ```
//!
//! on the nonnegative quadrant, with `alpha, delta > 0`.
//!
//! * [`system`] classifies coefficients and evaluates every closed-form
//!   quantity: the self-similar corner solution, the invariant ray, lower
//!   bounds, the angular rate and the explicit contraction constants.
//! * [`integrator`] computes trajectories from any start in the quadrant:
//!   closed form at the corner, a regularized squared-variable system on
//!   the axes, adaptive Dormand-Prince in the interior.
//! * [`analysis`] implements the level-set renormalization map and checks
//!   every structural property numerically.

// `!(x > 0.0)` rejects NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod integrator;
pub mod system;

pub use error::{Error, Result};
pub use integrator::{
    evaluate_closed_form, first_hit, hitting_time, reference_solve, solve, solve_corner,
    solve_edge, solve_interior, IntegratorConfig, Regime, Trajectory, TrajectorySample,
};
pub use system::{
    angular_derivative, classify, contraction_constant, corner_constants, find_direction,
    lower_bound_floor, slope_map, theta, vector_field, Classification, ClassificationTag,
    Coefficients, ContractionConstant, CornerConstants, Direction, QuadrantPoint,
};
