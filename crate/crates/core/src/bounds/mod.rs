//! Predictive count distributions, system reliability and its envelopes.

mod count;
mod curve;
mod optimize;
mod system;

pub use count::{count_cmf, count_pmf, count_pmf_posterior, CountDistribution};
pub use curve::{
    component_predictive_bounds, default_time_grid, imprecision_curve, reliability_bounds_curve, uniform_grid,
    BoundsCurve, CurvePoint, ImprecisionCurve, TimeScale, DEFAULT_GRID_POINTS,
};
pub use optimize::{
    compass_search, multi_start_minimize, optimize_bound, optimize_bound_with, seed_points, BoundOptions,
    BoundResult, Direction, SearchOptions, SearchOutcome,
};
pub use system::{system_reliability_point, TypeInput, TypeSetup};

pub(crate) use optimize::PinnedObjective;
