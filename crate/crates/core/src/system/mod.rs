//! Problem descriptions: parameterised nonlinearities with derivative oracles, envelopes,
//! pseudo-orbits, defects, hypothesis sampling and the example gallery.

mod checks;
pub mod csv_io;
mod defect;
mod gallery;
mod nonlinearity;
mod orbit;
mod problem;

pub use checks::{check_continuous, check_discrete, HypothesisReport, Status};
pub use defect::{defect_continuous, defect_discrete, DefectReport};
pub use gallery::{
    gallery, gallery_names, ContinuousProblem, DiscreteProblem, GalleryProblem, Params,
};
pub use nonlinearity::{Envelope, Nonlinearity};
pub(crate) use orbit::contract2;
pub use orbit::{
    ContinuousFamily, ContinuousOrbitJets, DiscreteFamily, OrbitJets, PseudoOrbitDiscrete,
    PseudoSolutionContinuous, VectorFn,
};
pub use problem::{ContinuousSystem, DecayEnvelope, DiscreteSystem};
