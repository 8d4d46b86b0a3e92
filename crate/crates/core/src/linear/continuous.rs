use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;

use super::{ode, ProjectionFamily};
use crate::{Error, Result};

pub type MatrixFn = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;

/// Continuous linear part `t ↦ A(t)` with integrator tolerance.
#[derive(Clone)]
pub struct LinearPartContinuous {
    dim: usize,
    a: MatrixFn,
    tol: f64,
}

impl std::fmt::Debug for LinearPartContinuous {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearPartContinuous")
            .field("dim", &self.dim)
            .field("tol", &self.tol)
            .finish()
    }
}

impl LinearPartContinuous {
    pub const DEFAULT_TOL: f64 = 1e-10;

    pub fn new(dim: usize, a: MatrixFn) -> Self {
        Self {
            dim,
            a,
            tol: Self::DEFAULT_TOL,
        }
    }

    pub fn constant(a: DMatrix<f64>) -> Self {
        let dim = a.nrows();
        Self::new(dim, Arc::new(move |_| a.clone()))
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn matrix(&self, t: f64) -> DMatrix<f64> {
        (self.a)(t)
    }

    /// Checks that `A` has the right shape and finite entries at the given times.
    pub fn check(&self, times: impl IntoIterator<Item = f64>) -> Result<()> {
        for t in times {
            let m = self.matrix(t);
            if m.nrows() != self.dim || m.ncols() != self.dim {
                return Err(Error::Dimension {
                    what: "A(t)",
                    expected: self.dim,
                    got: m.nrows(),
                });
            }
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::Integration {
                    t,
                    reason: "A(t) has non-finite entries".into(),
                });
            }
        }
        Ok(())
    }

    /// Solution operator from `s` to `t` by direct integration.
    pub fn integrate(&self, t: f64, s: f64) -> Result<DMatrix<f64>> {
        let a = &*self.a;
        ode::propagate(a, s, t, DMatrix::identity(self.dim, self.dim), self.tol)
    }
}

/// Evolution family `T(t, s)` of `x' = A(t) x`, with one-cell propagators on a uniform grid
/// `τ_j = origin + j·step`, `j = 0..=cells`, cached on first use.
pub struct EvolutionFamily {
    lin: LinearPartContinuous,
    origin: f64,
    step: f64,
    cells: usize,
    forward: Vec<OnceLock<Result<DMatrix<f64>>>>,
    backward: Vec<OnceLock<Result<DMatrix<f64>>>>,
}

impl std::fmt::Debug for EvolutionFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EvolutionFamily")
            .field("origin", &self.origin)
            .field("step", &self.step)
            .field("cells", &self.cells)
            .finish()
    }
}

fn clone_result(r: &Result<DMatrix<f64>>) -> Result<DMatrix<f64>> {
    match r {
        Ok(m) => Ok(m.clone()),
        Err(Error::Integration { t, reason }) => Err(Error::Integration {
            t: *t,
            reason: reason.clone(),
        }),
        Err(e) => Err(Error::Integration {
            t: f64::NAN,
            reason: e.to_string(),
        }),
    }
}

impl EvolutionFamily {
    pub fn new(lin: LinearPartContinuous, origin: f64, step: f64, cells: usize) -> Self {
        Self {
            lin,
            origin,
            step,
            cells,
            forward: (0..cells).map(|_| OnceLock::new()).collect(),
            backward: (0..cells).map(|_| OnceLock::new()).collect(),
        }
    }

    /// Family covering `[lo, hi]` with grid step `step` (the grid starts at `lo`).
    pub fn covering(lin: LinearPartContinuous, lo: f64, hi: f64, step: f64) -> Self {
        let cells = ((hi - lo) / step).ceil().max(1.0) as usize;
        Self::new(lin, lo, step, cells)
    }

    pub fn linear(&self) -> &LinearPartContinuous {
        &self.lin
    }

    pub fn dim(&self) -> usize {
        self.lin.dim()
    }

    pub fn grid_time(&self, j: usize) -> f64 {
        self.origin + j as f64 * self.step
    }

    pub fn range(&self) -> (f64, f64) {
        (self.origin, self.grid_time(self.cells))
    }

    /// `T(τ_{j+1}, τ_j)`.
    pub fn cell_forward(&self, j: usize) -> Result<DMatrix<f64>> {
        clone_result(
            self.forward[j]
                .get_or_init(|| self.lin.integrate(self.grid_time(j + 1), self.grid_time(j))),
        )
    }

    /// `T(τ_j, τ_{j+1})`.
    pub fn cell_backward(&self, j: usize) -> Result<DMatrix<f64>> {
        clone_result(
            self.backward[j]
                .get_or_init(|| self.lin.integrate(self.grid_time(j), self.grid_time(j + 1))),
        )
    }

    /// Grid index of `t` if `t` is (up to rounding) a grid point.
    fn snap(&self, t: f64) -> Option<usize> {
        let x = (t - self.origin) / self.step;
        let r = x.round();
        if (x - r).abs() <= 1e-9 && r >= 0.0 && r <= self.cells as f64 {
            Some(r as usize)
        } else {
            None
        }
    }

    fn in_range(&self, t: f64) -> bool {
        let (lo, hi) = self.range();
        t >= lo - 1e-12 * self.step && t <= hi + 1e-12 * self.step
    }

    /// `T(t, s)`. Inside the cached range it is assembled from cell propagators plus two
    /// partial-cell integrations; outside it falls back to direct integration.
    pub fn evolution(&self, t: f64, s: f64) -> Result<DMatrix<f64>> {
        let d = self.dim();
        if t == s {
            return Ok(DMatrix::identity(d, d));
        }
        if !self.in_range(t) || !self.in_range(s) {
            return self.lin.integrate(t, s);
        }
        let pos = |x: f64| (x - self.origin) / self.step;
        if t > s {
            // first grid point ≥ s, last grid point ≤ t
            let a = self.snap(s).unwrap_or_else(|| pos(s).ceil() as usize);
            let b = self.snap(t).unwrap_or_else(|| pos(t).floor() as usize);
            if a > b {
                return self.lin.integrate(t, s);
            }
            let mut m = if self.snap(s).is_some() {
                DMatrix::identity(d, d)
            } else {
                self.lin.integrate(self.grid_time(a), s)?
            };
            for j in a..b {
                m = self.cell_forward(j)? * m;
            }
            if self.snap(t).is_none() {
                m = self.lin.integrate(t, self.grid_time(b))? * m;
            }
            Ok(m)
        } else {
            // walking backwards: last grid point ≤ s, first grid point ≥ t
            let a = self.snap(s).unwrap_or_else(|| pos(s).floor() as usize);
            let b = self.snap(t).unwrap_or_else(|| pos(t).ceil() as usize);
            if b > a {
                return self.lin.integrate(t, s);
            }
            let mut m = if self.snap(s).is_some() {
                DMatrix::identity(d, d)
            } else {
                self.lin.integrate(self.grid_time(a), s)?
            };
            for j in (b..a).rev() {
                m = self.cell_backward(j)? * m;
            }
            if self.snap(t).is_none() {
                m = self.lin.integrate(t, self.grid_time(b))? * m;
            }
            Ok(m)
        }
    }
}

/// Continuous Green kernel `𝒢(t, s)`: `T(t,s)P(s)` for `t ≥ s`, `−T(t,s)(Id − P(s))` for `t < s`.
pub fn green_continuous(
    evo: &EvolutionFamily,
    proj: &ProjectionFamily<f64>,
    t: f64,
    s: f64,
) -> Result<DMatrix<f64>> {
    let d = evo.dim();
    let p = proj.at(s, d);
    let tt = evo.evolution(t, s)?;
    if t >= s {
        Ok(tt * p)
    } else {
        Ok(-(tt * (DMatrix::identity(d, d) - p)))
    }
}
