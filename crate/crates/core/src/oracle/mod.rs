//! Independent checks for the closed forms and the optimizer: numeric
//! quadrature over λ, seeded Monte Carlo, and an exhaustive n0 grid.

mod grid;
mod mc;
mod quadrature;

pub use grid::{grid_bound_oracle, GridBound, GRID_EVALUATION_LIMIT};
pub use mc::{mc_count_pmf, mc_system_reliability, sample_inverse_gamma, McConfig, McCountPmf, McEstimate, MIN_SAMPLES};
pub use quadrature::{
    integrate, integrate_half_line, quadrature_predictive_oracle, Integral, PredictiveQuery, ORACLE_REL_TOL,
};
