//! Contraction data, the fixed-point operator `T` and certified Picard iteration.

mod bounds;
mod operator;
mod picard;
mod points;
mod solve;

pub(crate) use bounds::interior_sup;
pub use bounds::{
    estimate_bounds_discrete, hyers_ulam_constants, BoundEstimates, Method, Tail, TailStatus,
};
pub use operator::{apply_t_discrete, DiscreteGreen, DiscreteOperator, Green, ShadowOperator};
pub use picard::{picard, PicardTrace};
pub use points::{HighDerivativeDiagnostic, PointJets, Points, DIAGNOSTIC_N};
pub use solve::{solve_shadow, solve_shadow_discrete, uniqueness_probe, Grid, ShadowResult};
