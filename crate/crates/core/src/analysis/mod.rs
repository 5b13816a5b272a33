//! The renormalization map on level sets and numerical checks of the
//! structural properties of the flow.

mod comparison;
mod properties;
mod qmap;
mod report;
mod suite;

pub use comparison::{check_comparison, PiecewiseLinear};
pub use properties::{
    check_hitting_time_bound, check_scaling, check_semigroup, check_slope_limit, check_trajectory,
    corner_uniqueness,
};
pub use qmap::{
    estimate_contraction, fixed_point, iterate_q, iterate_q_with_deviation, poincare_q, qmap_grid,
    LevelPoint, QRow, CONTRACTION_SLACK, DEGENERATE_RATIO_TOL, ITERATION_CONSISTENCY_TOL,
};
pub use report::{merge_reports, Criterion, PropertyReport};
pub use suite::{sample_coefficients, sample_level_point, verify_all, PROPERTY_NAMES};
