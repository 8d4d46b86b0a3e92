use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::linalg::{stack, vec_norm};
use crate::system::{contract2, Nonlinearity};
use crate::{Error, Exec, Result, Samples};

/// λ-derivatives of the pseudo-orbit at the evaluation points: `∂y`, `∂y_next`, `∂²y`,
/// `∂²y_next` (`next` is the shifted sample in discrete time and the time derivative in
/// continuous time). Second derivatives are `d × p²` as in [`crate::system::OrbitJets`].
#[derive(Debug, Clone)]
pub struct PointJets {
    pub d1: Vec<DMatrix<f64>>,
    pub d1next: Vec<DMatrix<f64>>,
    pub d2: Vec<DMatrix<f64>>,
    pub d2next: Vec<DMatrix<f64>>,
}

/// Everything the forcing `A y + f_λ(·, y + z) − y_next` needs at the points where the kernel
/// sum or quadrature samples it.
#[derive(Debug, Clone)]
pub struct Points<T> {
    pub t: Vec<T>,
    pub a: Vec<DMatrix<f64>>,
    pub y: Samples,
    pub ynext: Samples,
    pub eps: Vec<f64>,
    pub lambda: DVector<f64>,
    pub jets: Option<PointJets>,
}

/// Outcome of comparing second λ-derivatives of `f` along `y + z` and along `y`.
#[derive(Debug, Clone, Serialize)]
pub struct HighDerivativeDiagnostic {
    /// Largest `‖Δ‖ / (C ε N M² ‖z‖∞)` over the points (0 when `z = 0`).
    pub worst_ratio: f64,
    pub m: f64,
    pub n: f64,
    pub holds: bool,
}

/// Number of summands in the second-order expansion, used as the constant `N`.
pub const DIAGNOSTIC_N: f64 = 5.0;

impl<T: Copy + Send + Sync> Points<T> {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.y.nrows()
    }

    fn state(&self, k: usize, zp: &Samples) -> DVector<f64> {
        self.y.column(k) + zp.column(k)
    }

    fn jets(&self) -> Result<&PointJets> {
        self.jets.as_ref().ok_or_else(|| {
            Error::JetUnavailable("pseudo-orbit carries no λ-derivative oracles".into())
        })
    }

    /// `A y + f_λ(·, y + z) − y_next`.
    pub fn forcing(&self, f: &dyn Nonlinearity<T>, zp: &Samples, exec: Exec) -> Samples {
        let cols = exec.map(self.len(), |k| {
            let x = self.state(k, zp);
            &self.a[k] * self.y.column(k) + f.eval(self.t[k], &x, &self.lambda)
                - self.ynext.column(k)
        });
        stack(&cols, self.dim())
    }

    pub fn jacobians(
        &self,
        f: &dyn Nonlinearity<T>,
        zp: &Samples,
        exec: Exec,
    ) -> Vec<DMatrix<f64>> {
        exec.map(self.len(), |k| {
            f.dx(self.t[k], &self.state(k, zp), &self.lambda)
        })
    }

    /// `∂f/∂x(y + z)·η`.
    pub fn forcing_dz(&self, jac: &[DMatrix<f64>], etap: &Samples, exec: Exec) -> Samples {
        let cols = exec.map(self.len(), |k| &jac[k] * etap.column(k));
        stack(&cols, self.dim())
    }

    /// `A ∂y μ + ∂f/∂λ μ + ∂f/∂x ∂y μ − ∂y_next μ`, all partials along `y + z`.
    pub fn forcing_dlambda(
        &self,
        f: &dyn Nonlinearity<T>,
        zp: &Samples,
        mu: &DVector<f64>,
        exec: Exec,
    ) -> Result<Samples> {
        let j = self.jets()?;
        let cols = exec.map(self.len(), |k| {
            let (t, x) = (self.t[k], self.state(k, zp));
            let dy = &j.d1[k] * mu;
            &self.a[k] * &dy + f.dlambda(t, &x, &self.lambda) * mu + f.dx(t, &x, &self.lambda) * &dy
                - &j.d1next[k] * mu
        });
        Ok(stack(&cols, self.dim()))
    }

    /// Source of the second-order jet equation:
    /// `A D²y − D²y_next + f_x D²y + f_λλ(μ,μ) + 2 f_xλ(v, μ) + f_xx(v, v)` with `v = ∂y μ + w1`.
    pub fn forcing_second(
        &self,
        f: &dyn Nonlinearity<T>,
        zp: &Samples,
        w1p: &Samples,
        mu: &DVector<f64>,
        exec: Exec,
    ) -> Result<Samples> {
        let j = self.jets()?;
        let cols = exec.map(self.len(), |k| {
            let (t, x, l) = (self.t[k], self.state(k, zp), &self.lambda);
            let d2 = contract2(&j.d2[k], mu);
            let v = &j.d1[k] * mu + w1p.column(k);
            &self.a[k] * &d2 - contract2(&j.d2next[k], mu)
                + f.dx(t, &x, l) * &d2
                + f.dlambdalambda(t, &x, l, mu, mu)
                + f.dxlambda(t, &x, l, &v, mu) * 2.0
                + f.dxx(t, &x, l, &v, &v)
        });
        Ok(stack(&cols, self.dim()))
    }

    /// Checks `‖Φ(y + z) − Φ(y)‖ ≤ C ε N M² ‖z‖∞` pointwise, where `Φ(x)` is the second
    /// λ-derivative of `f_λ(·, x)` along the pseudo-orbit in direction `μ` and
    /// `M = max(1, sup‖∂y μ‖, sup‖∂²y(μ, μ)‖)`.
    pub fn high_derivative_diagnostic(
        &self,
        f: &dyn Nonlinearity<T>,
        zp: &Samples,
        sup_z: f64,
        mu: &DVector<f64>,
        c_bound: f64,
    ) -> Result<HighDerivativeDiagnostic> {
        let j = self.jets()?;
        let l = &self.lambda;
        let mut m: f64 = 1.0;
        for k in 0..self.len() {
            m = m
                .max(vec_norm(&(&j.d1[k] * mu)))
                .max(vec_norm(&contract2(&j.d2[k], mu)));
        }
        let phi = |k: usize, x: &DVector<f64>| {
            let t = self.t[k];
            let dy = &j.d1[k] * mu;
            f.dlambdalambda(t, x, l, mu, mu)
                + f.dxlambda(t, x, l, &dy, mu) * 2.0
                + f.dxx(t, x, l, &dy, &dy)
                + f.dx(t, x, l) * contract2(&j.d2[k], mu)
        };
        let mut worst: f64 = 0.0;
        let mut holds = true;
        for k in 0..self.len() {
            let y = self.y.column(k).into_owned();
            let delta = vec_norm(&(phi(k, &self.state(k, zp)) - phi(k, &y)));
            let rhs = c_bound * self.eps[k] * DIAGNOSTIC_N * m * m * sup_z;
            if delta > rhs * (1.0 + 1e-9) + 1e-14 {
                holds = false;
            }
            if rhs > 0.0 {
                worst = worst.max(delta / rhs);
            }
        }
        Ok(HighDerivativeDiagnostic {
            worst_ratio: worst,
            m,
            n: DIAGNOSTIC_N,
            holds,
        })
    }
}
