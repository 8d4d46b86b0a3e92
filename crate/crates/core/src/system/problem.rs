use std::sync::Arc;

use crate::linear::{
    IndexWindow, LinearPartContinuous, LinearPartDiscrete, ProjectionFamily, TimeWindow,
};
use crate::{Error, Result};

use super::{Envelope, Nonlinearity};

/// Difference equation `x_{n+1} = A_n x_n + f_λ(n, x_n)` over a finite window.
#[derive(Clone)]
pub struct DiscreteSystem {
    pub lin: LinearPartDiscrete,
    pub proj: ProjectionFamily<i64>,
    pub f: Arc<dyn Nonlinearity<i64>>,
    pub eps: Envelope<i64>,
    /// Constant `C` with second partials of `f` bounded by `C ε`.
    pub deriv_bound: f64,
    /// The user asserts that the linear part has no nonzero bounded solution.
    pub assume_no_bounded_solutions: bool,
}

impl std::fmt::Debug for DiscreteSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiscreteSystem")
            .field("dim", &self.dim())
            .field("window", self.window())
            .field("proj", &self.proj)
            .finish_non_exhaustive()
    }
}

impl DiscreteSystem {
    pub fn new(
        lin: LinearPartDiscrete,
        proj: ProjectionFamily<i64>,
        f: Arc<dyn Nonlinearity<i64>>,
        eps: Envelope<i64>,
        deriv_bound: f64,
    ) -> Result<Self> {
        if f.dim() != lin.dim() {
            return Err(Error::Dimension {
                what: "nonlinearity",
                expected: lin.dim(),
                got: f.dim(),
            });
        }
        if !(deriv_bound > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "C must be > 0, got {deriv_bound}"
            )));
        }
        let w = *lin.window();
        proj.check_idempotent(w.indices(), lin.dim())?;
        if let Some(n) = w.indices().find(|&n| !(eps(n) > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "ε must be > 0, fails at n = {n}"
            )));
        }
        Ok(Self {
            lin,
            proj,
            f,
            eps,
            deriv_bound,
            assume_no_bounded_solutions: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.lin.dim()
    }

    pub fn window(&self) -> &IndexWindow {
        self.lin.window()
    }

    pub fn lipschitz(&self, n: i64) -> f64 {
        self.f.lipschitz(n)
    }
}

/// Exponential decay envelope for the tails of the kernel integrals: `c(s), ε(s) ≤ scale·e^{−rate|s|}`
/// and `‖𝒢(t,s)‖ ≤ kernel_bound`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEnvelope {
    pub rate: f64,
    pub scale: f64,
    pub kernel_bound: f64,
}

/// Differential equation `x' = A(t)x + f_λ(t, x)` with a computation window.
#[derive(Clone)]
pub struct ContinuousSystem {
    pub lin: LinearPartContinuous,
    pub proj: ProjectionFamily<f64>,
    pub f: Arc<dyn Nonlinearity<f64>>,
    pub eps: Envelope<f64>,
    pub window: TimeWindow,
    pub deriv_bound: f64,
    pub decay: Option<DecayEnvelope>,
    pub assume_no_bounded_solutions: bool,
}

impl std::fmt::Debug for ContinuousSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ContinuousSystem")
            .field("dim", &self.dim())
            .field("window", &self.window)
            .field("proj", &self.proj)
            .field("decay", &self.decay)
            .finish_non_exhaustive()
    }
}

impl ContinuousSystem {
    pub fn new(
        lin: LinearPartContinuous,
        proj: ProjectionFamily<f64>,
        f: Arc<dyn Nonlinearity<f64>>,
        eps: Envelope<f64>,
        window: TimeWindow,
        deriv_bound: f64,
    ) -> Result<Self> {
        if f.dim() != lin.dim() {
            return Err(Error::Dimension {
                what: "nonlinearity",
                expected: lin.dim(),
                got: f.dim(),
            });
        }
        if !(deriv_bound > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "C must be > 0, got {deriv_bound}"
            )));
        }
        let times = window.times();
        lin.check(times.iter().copied())?;
        proj.check_idempotent(times.iter().copied(), lin.dim())?;
        if let Some(t) = times.iter().find(|&&t| !(eps(t) > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "ε must be > 0, fails at t = {t}"
            )));
        }
        Ok(Self {
            lin,
            proj,
            f,
            eps,
            window,
            deriv_bound,
            decay: None,
            assume_no_bounded_solutions: false,
        })
    }

    pub fn with_decay(mut self, decay: DecayEnvelope) -> Self {
        self.decay = Some(decay);
        self
    }

    pub fn dim(&self) -> usize {
        self.lin.dim()
    }

    pub fn lipschitz(&self, t: f64) -> f64 {
        self.f.lipschitz(t)
    }
}
