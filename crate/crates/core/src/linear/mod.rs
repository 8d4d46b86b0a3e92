//! Linear nonautonomous machinery: cocycles and evolution families, projections, Green
//! kernels, and sampled certification of exponential dichotomies.

mod continuous;
mod dichotomy;
mod discrete;
pub mod ode;
mod projection;
mod window;

pub use continuous::{green_continuous, EvolutionFamily, LinearPartContinuous, MatrixFn};
pub use dichotomy::{
    certify_dichotomy_continuous, certify_dichotomy_discrete, DichotomyCertificate, SampleGrid,
};
pub use discrete::{cocycle, green_discrete, DiscreteKernel, LinearPartDiscrete};
pub use projection::ProjectionFamily;
pub use window::{IndexWindow, TimeWindow};
