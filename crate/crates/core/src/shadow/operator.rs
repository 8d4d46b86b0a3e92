use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::linalg::vec_norm;
use crate::linear::{DichotomyCertificate, DiscreteKernel};
use crate::system::{DiscreteSystem, Nonlinearity, OrbitJets, PseudoOrbitDiscrete};
use crate::{Error, Exec, Result, Samples};

use super::bounds::{discrete_bounds, BoundEstimates};
use super::points::{HighDerivativeDiagnostic, PointJets, Points};
use super::solve::Grid;

/// Kernel side of the operator: maps grid functions to the evaluation points and integrates
/// point forcings back against the Green kernel.
pub trait Green: Send + Sync {
    fn dim(&self) -> usize;
    /// Number of grid samples.
    fn len(&self) -> usize;
    fn interior(&self) -> Range<usize>;
    /// Grid samples to evaluation-point samples.
    fn lift(&self, z: &Samples) -> Samples;
    /// Kernel sum/integral of a forcing given at the evaluation points.
    fn apply(&self, forcing: &Samples, exec: Exec) -> Samples;
}

/// Discrete kernel sums: the evaluation points are `lo .. hi−1`.
#[derive(Debug, Clone)]
pub struct DiscreteGreen {
    pub kernel: DiscreteKernel,
}

impl Green for DiscreteGreen {
    fn dim(&self) -> usize {
        self.kernel.dim()
    }

    fn len(&self) -> usize {
        self.kernel.window().len()
    }

    fn interior(&self) -> Range<usize> {
        self.kernel.window().interior_cols()
    }

    fn lift(&self, z: &Samples) -> Samples {
        z.columns(0, self.len() - 1).into_owned()
    }

    fn apply(&self, forcing: &Samples, exec: Exec) -> Samples {
        let mut g = Samples::zeros(self.dim(), self.len());
        g.columns_mut(0, self.len() - 1).copy_from(forcing);
        self.kernel.apply(&g, exec)
    }
}

pub(crate) type ResidualFn = Arc<dyn Fn(&Samples) -> Result<f64> + Send + Sync>;

/// `T_λ z = K[A y + f_λ(·, y + z) − y_next]` and its partial derivatives, for one system and
/// one pseudo-orbit.
pub struct ShadowOperator<T, G> {
    pub f: Arc<dyn Nonlinearity<T>>,
    pub points: Points<T>,
    pub green: G,
    pub bounds: BoundEstimates,
    pub grid: Grid,
    /// Pseudo-orbit on the grid.
    pub y_grid: Samples,
    pub deriv_bound: f64,
    pub exec: Exec,
    /// Orbit-equation residual of `x = y + z` on the interior.
    pub(crate) residual: ResidualFn,
}

pub type DiscreteOperator = ShadowOperator<i64, DiscreteGreen>;

impl<T: Copy + Send + Sync, G: Green> ShadowOperator<T, G> {
    pub fn dim(&self) -> usize {
        self.green.dim()
    }

    pub fn len(&self) -> usize {
        self.green.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn interior(&self) -> Range<usize> {
        self.green.interior()
    }

    fn check(&self, z: &Samples) -> Result<()> {
        if z.ncols() != self.len() || z.nrows() != self.dim() {
            return Err(Error::WindowMismatch {
                expected: self.len(),
                got: z.ncols(),
            });
        }
        Ok(())
    }

    /// `T_λ z`.
    pub fn apply(&self, z: &Samples) -> Result<Samples> {
        self.check(z)?;
        let g = self
            .points
            .forcing(self.f.as_ref(), &self.green.lift(z), self.exec);
        Ok(self.green.apply(&g, self.exec))
    }

    /// `∂f/∂x` along `y + z` at the evaluation points.
    pub fn jacobians(&self, z: &Samples) -> Result<Vec<DMatrix<f64>>> {
        self.check(z)?;
        Ok(self
            .points
            .jacobians(self.f.as_ref(), &self.green.lift(z), self.exec))
    }

    /// `∂_z T·η` with Jacobians from [`Self::jacobians`].
    pub fn apply_dz_with(&self, jac: &[DMatrix<f64>], eta: &Samples) -> Result<Samples> {
        self.check(eta)?;
        let g = self
            .points
            .forcing_dz(jac, &self.green.lift(eta), self.exec);
        Ok(self.green.apply(&g, self.exec))
    }

    /// `∂_z T·η` at `z`.
    pub fn apply_dz(&self, z: &Samples, eta: &Samples) -> Result<Samples> {
        let jac = self.jacobians(z)?;
        self.apply_dz_with(&jac, eta)
    }

    /// `∂_λ T·μ` at `z`.
    pub fn apply_dlambda(&self, z: &Samples, mu: &DVector<f64>) -> Result<Samples> {
        self.check(z)?;
        self.check_direction(mu)?;
        let g = self
            .points
            .forcing_dlambda(self.f.as_ref(), &self.green.lift(z), mu, self.exec)?;
        Ok(self.green.apply(&g, self.exec))
    }

    /// `∂²_λλT(μ,μ) + 2∂²_λzT(μ, w1) + ∂²_zzT(w1, w1)` plus the `∂²y` terms.
    pub fn second_source(&self, z: &Samples, w1: &Samples, mu: &DVector<f64>) -> Result<Samples> {
        self.check(z)?;
        self.check(w1)?;
        self.check_direction(mu)?;
        let g = self.points.forcing_second(
            self.f.as_ref(),
            &self.green.lift(z),
            &self.green.lift(w1),
            mu,
            self.exec,
        )?;
        Ok(self.green.apply(&g, self.exec))
    }

    pub fn high_derivative_diagnostic(
        &self,
        z: &Samples,
        mu: &DVector<f64>,
    ) -> Result<HighDerivativeDiagnostic> {
        self.check(z)?;
        let sup_z = crate::linalg::sup_norm(z);
        self.points.high_derivative_diagnostic(
            self.f.as_ref(),
            &self.green.lift(z),
            sup_z,
            mu,
            self.deriv_bound,
        )
    }

    /// Orbit-equation residual of `y + z` on the interior.
    pub fn equation_residual(&self, z: &Samples) -> Result<f64> {
        self.check(z)?;
        (self.residual)(&(&self.y_grid + z))
    }

    pub fn lambda(&self) -> &DVector<f64> {
        &self.points.lambda
    }

    fn check_direction(&self, mu: &DVector<f64>) -> Result<()> {
        if mu.len() != self.points.lambda.len() {
            return Err(Error::Dimension {
                what: "direction",
                expected: self.points.lambda.len(),
                got: mu.len(),
            });
        }
        Ok(())
    }
}

fn discrete_jets(j: &OrbitJets) -> PointJets {
    let n = j.first.len() - 1;
    PointJets {
        d1: j.first[..n].to_vec(),
        d1next: j.first[1..].to_vec(),
        d2: j.second[..n].to_vec(),
        d2next: j.second[1..].to_vec(),
    }
}

impl ShadowOperator<i64, DiscreteGreen> {
    /// Builds the kernel table and the window bounds `q̂`, `L̂`.
    pub fn discrete(sys: &DiscreteSystem, y: &PseudoOrbitDiscrete, exec: Exec) -> Result<Self> {
        let w = *sys.window();
        if y.window != w {
            return Err(Error::WindowMismatch {
                expected: w.len(),
                got: y.window.len(),
            });
        }
        if y.dim() != sys.dim() || y.lambda.len() != sys.f.param_dim() {
            return Err(Error::Dimension {
                what: "pseudo-orbit",
                expected: sys.dim(),
                got: y.dim(),
            });
        }
        let kernel = DiscreteKernel::build(&sys.lin, &sys.proj, exec)?;
        let bounds = discrete_bounds(sys, &kernel, None, exec);
        let n = w.len() - 1;
        let t: Vec<i64> = (0..n).map(|p| w.index(p)).collect();
        let a = t
            .iter()
            .map(|&k| sys.lin.matrix(k).cloned())
            .collect::<Result<Vec<_>>>()?;
        let points = Points {
            eps: t.iter().map(|&k| (sys.eps)(k)).collect(),
            t,
            a,
            y: y.values.columns(0, n).into_owned(),
            ynext: y.values.columns(1, n).into_owned(),
            lambda: y.lambda.clone(),
            jets: y.jets.as_ref().map(discrete_jets),
        };
        let s = sys.clone();
        let lambda = y.lambda.clone();
        let residual: ResidualFn = Arc::new(move |x: &Samples| {
            let w = *s.window();
            let r = w.interior_cols();
            let mut worst: f64 = 0.0;
            for pos in r.start..r.end - 1 {
                let n = w.index(pos);
                let xn = x.column(pos).into_owned();
                let res = x.column(pos + 1) - s.lin.matrix(n)? * &xn - s.f.eval(n, &xn, &lambda);
                worst = worst.max(vec_norm(&res));
            }
            Ok(worst)
        });
        Ok(Self {
            f: sys.f.clone(),
            points,
            green: DiscreteGreen { kernel },
            bounds,
            grid: Grid::Discrete(w),
            y_grid: y.values.clone(),
            deriv_bound: sys.deriv_bound,
            exec,
            residual,
        })
    }

    /// Attaches a dichotomy certificate and the truncation tails it implies.
    pub fn with_dichotomy(mut self, sys: &DiscreteSystem, cert: DichotomyCertificate) -> Self {
        self.bounds = discrete_bounds(sys, &self.green.kernel, Some(&cert), self.exec);
        self
    }
}

/// One application of `T̂` (builds the kernel; use [`DiscreteOperator`] for repeated use).
pub fn apply_t_discrete(
    sys: &DiscreteSystem,
    y: &PseudoOrbitDiscrete,
    z: &Samples,
    exec: Exec,
) -> Result<Samples> {
    DiscreteOperator::discrete(sys, y, exec)?.apply(z)
}
