//! Robust Bayesian reliability bounds for coherent systems.
//!
//! Component lifetimes are Weibull with known shape per component type and
//! an inverse-gamma prior on the scale. Prior knowledge is a box of
//! hyperparameters per type; the crate computes the lower and upper
//! system reliability over that box, before or after right-censored data
//! from the running system, using the survival signature of the layout.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod io;
pub mod lifetime;
pub mod oracle;
pub mod scalar;
pub mod special;
pub mod structure;

pub use error::{Error, Result, StructureError};
pub use scalar::Real;

pub use bounds::{
    component_predictive_bounds, count_cmf, count_pmf, imprecision_curve, optimize_bound, reliability_bounds_curve,
    system_reliability_point, Direction, TimeScale,
};
pub use io::{parse_observations_doc, parse_system_doc, SystemDefinition};
pub use lifetime::{update_posterior, ObservationSet, PriorBox, PriorParams, WeibullShape};
pub use structure::{
    check_coherence, compute_survival_signature, ComponentTypeDecl, StructureExpr, SurvivalSignature, SystemModel,
};

pub type WeibullShape64 = lifetime::WeibullShape<f64>;
pub type PriorParams64 = lifetime::PriorParams<f64>;
pub type PosteriorParams64 = lifetime::PosteriorParams<f64>;
pub type PriorBox64 = lifetime::PriorBox<f64>;
pub type ObservationSet64 = lifetime::ObservationSet<f64>;
pub type SystemModel64 = structure::SystemModel<f64>;
pub type TypeInput64 = bounds::TypeInput<f64>;
pub type TypeSetup64 = bounds::TypeSetup<f64>;
pub type CountDistribution64 = bounds::CountDistribution<f64>;
pub type BoundResult64 = bounds::BoundResult<f64>;
pub type BoundsCurve64 = bounds::BoundsCurve<f64>;
pub type ImprecisionCurve64 = bounds::ImprecisionCurve<f64>;
