use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::linear::{IndexWindow, MatrixFn};
use crate::{Error, Result, Samples};

pub type VectorFn = Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>;

/// Parameter derivatives of a discrete pseudo-orbit at every window index.
///
/// `first[j]` is `∂y/∂λ` (`d × p`); `second[j]` stores `∂²y/∂λ²` as a `d × p²` matrix whose
/// column `a·p + b` is `∂²y/∂λ_a∂λ_b`.
#[derive(Debug, Clone)]
pub struct OrbitJets {
    pub first: Vec<DMatrix<f64>>,
    pub second: Vec<DMatrix<f64>>,
}

pub(crate) fn contract2(t: &DMatrix<f64>, mu: &DVector<f64>) -> DVector<f64> {
    let p = mu.len();
    let mut out = DVector::zeros(t.nrows());
    for a in 0..p {
        for b in 0..p {
            let w = mu[a] * mu[b];
            if w != 0.0 {
                out += t.column(a * p + b) * w;
            }
        }
    }
    out
}

impl OrbitJets {
    pub fn first_dir(&self, pos: usize, mu: &DVector<f64>) -> DVector<f64> {
        &self.first[pos] * mu
    }

    pub fn second_dir(&self, pos: usize, mu: &DVector<f64>) -> DVector<f64> {
        contract2(&self.second[pos], mu)
    }
}

/// Approximate solution `(y_n)` of the difference equation over a window.
#[derive(Debug, Clone)]
pub struct PseudoOrbitDiscrete {
    pub lambda: DVector<f64>,
    pub window: IndexWindow,
    /// `d × N` samples, column `j` at index `window.lo + j`.
    pub values: Samples,
    pub jets: Option<OrbitJets>,
}

impl PseudoOrbitDiscrete {
    pub fn new(lambda: DVector<f64>, window: IndexWindow, values: Samples) -> Result<Self> {
        if values.ncols() != window.len() {
            return Err(Error::WindowMismatch {
                expected: window.len(),
                got: values.ncols(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "pseudo-orbit has non-finite entries".into(),
            ));
        }
        Ok(Self {
            lambda,
            window,
            values,
            jets: None,
        })
    }

    pub fn with_jets(mut self, jets: OrbitJets) -> Result<Self> {
        if jets.first.len() != self.window.len() || jets.second.len() != self.window.len() {
            return Err(Error::WindowMismatch {
                expected: self.window.len(),
                got: jets.first.len(),
            });
        }
        self.jets = Some(jets);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn at(&self, pos: usize) -> DVector<f64> {
        self.values.column(pos).into_owned()
    }

    pub fn jets(&self) -> Result<&OrbitJets> {
        self.jets.as_ref().ok_or_else(|| {
            Error::JetUnavailable("pseudo-orbit carries no λ-derivative oracles".into())
        })
    }
}

/// `λ`-derivative oracles of a continuous pseudo-solution and of its time derivative.
/// Second derivatives use the same `d × p²` layout as [`OrbitJets`].
#[derive(Clone)]
pub struct ContinuousOrbitJets {
    pub dy: MatrixFn,
    pub dyp: MatrixFn,
    pub d2y: MatrixFn,
    pub d2yp: MatrixFn,
}

impl ContinuousOrbitJets {
    pub fn first_dir(&self, t: f64, mu: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        ((self.dy)(t) * mu, (self.dyp)(t) * mu)
    }

    pub fn second_dir(&self, t: f64, mu: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        (
            contract2(&(self.d2y)(t), mu),
            contract2(&(self.d2yp)(t), mu),
        )
    }
}

/// Continuously differentiable approximate solution with explicit time derivative.
#[derive(Clone)]
pub struct PseudoSolutionContinuous {
    pub lambda: DVector<f64>,
    pub y: VectorFn,
    pub yp: VectorFn,
    pub jets: Option<ContinuousOrbitJets>,
    dim: usize,
}

impl std::fmt::Debug for PseudoSolutionContinuous {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PseudoSolutionContinuous")
            .field("lambda", &self.lambda)
            .field("dim", &self.dim)
            .field("jets", &self.jets.is_some())
            .finish()
    }
}

impl PseudoSolutionContinuous {
    pub fn new(lambda: DVector<f64>, dim: usize, y: VectorFn, yp: VectorFn) -> Self {
        Self {
            lambda,
            y,
            yp,
            jets: None,
            dim,
        }
    }

    pub fn with_jets(mut self, jets: ContinuousOrbitJets) -> Self {
        self.jets = Some(jets);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, t: f64) -> DVector<f64> {
        (self.y)(t)
    }

    pub fn deriv(&self, t: f64) -> DVector<f64> {
        (self.yp)(t)
    }

    pub fn jets(&self) -> Result<&ContinuousOrbitJets> {
        self.jets.as_ref().ok_or_else(|| {
            Error::JetUnavailable("pseudo-solution carries no λ-derivative oracles".into())
        })
    }

    /// Piecewise cubic Hermite interpolant through samples `(t_k, y_k, y'_k)`; constant
    /// extrapolation of the end values outside the sampled range.
    pub fn from_samples(
        lambda: DVector<f64>,
        times: Vec<f64>,
        values: Samples,
        derivs: Samples,
    ) -> Result<Self> {
        let n = times.len();
        if n < 2 || values.ncols() != n || derivs.ncols() != n {
            return Err(Error::WindowMismatch {
                expected: n,
                got: values.ncols(),
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "sample times must increase strictly".into(),
            ));
        }
        let dim = values.nrows();
        let times = Arc::new(times);
        let values = Arc::new(values);
        let derivs = Arc::new(derivs);
        let locate = {
            let times = times.clone();
            move |t: f64| -> Option<(usize, f64, f64)> {
                if t < times[0] || t > times[times.len() - 1] {
                    return None;
                }
                let k = match times.binary_search_by(|x| x.total_cmp(&t)) {
                    Ok(k) => k.min(times.len() - 2),
                    Err(k) => k - 1,
                };
                let h = times[k + 1] - times[k];
                Some((k, (t - times[k]) / h, h))
            }
        };
        let locate = Arc::new(locate);
        let (t2, v2, d2, l2) = (
            times.clone(),
            values.clone(),
            derivs.clone(),
            locate.clone(),
        );
        let y: VectorFn = Arc::new(move |t| match l2(t) {
            None => {
                let k = if t < t2[0] { 0 } else { t2.len() - 1 };
                v2.column(k).into_owned()
            }
            Some((k, s, h)) => {
                let (h00, h10, h01, h11) = (
                    2.0 * s.powi(3) - 3.0 * s * s + 1.0,
                    s.powi(3) - 2.0 * s * s + s,
                    -2.0 * s.powi(3) + 3.0 * s * s,
                    s.powi(3) - s * s,
                );
                v2.column(k) * h00
                    + d2.column(k) * (h10 * h)
                    + v2.column(k + 1) * h01
                    + d2.column(k + 1) * (h11 * h)
            }
        });
        let (t3, v3, d3, l3) = (times, values, derivs, locate);
        let yp: VectorFn = Arc::new(move |t| match l3(t) {
            None => {
                let _ = &t3;
                DVector::zeros(v3.nrows())
            }
            Some((k, s, h)) => {
                let (g00, g10, g01, g11) = (
                    6.0 * s * s - 6.0 * s,
                    3.0 * s * s - 4.0 * s + 1.0,
                    -6.0 * s * s + 6.0 * s,
                    3.0 * s * s - 2.0 * s,
                );
                v3.column(k) * (g00 / h)
                    + d3.column(k) * g10
                    + v3.column(k + 1) * (g01 / h)
                    + d3.column(k + 1) * g11
            }
        });
        Ok(Self::new(lambda, dim, y, yp))
    }
}

/// `λ ↦` pseudo-orbit, used by finite-difference oracles.
pub type DiscreteFamily = Arc<dyn Fn(&DVector<f64>) -> Result<PseudoOrbitDiscrete> + Send + Sync>;
pub type ContinuousFamily =
    Arc<dyn Fn(&DVector<f64>) -> Result<PseudoSolutionContinuous> + Send + Sync>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_reproduces_cubic() {
        let f = |t: f64| t.powi(3) - 2.0 * t;
        let fp = |t: f64| 3.0 * t * t - 2.0;
        let times: Vec<f64> = (0..11).map(|k| -1.0 + 0.2 * k as f64).collect();
        let v = Samples::from_fn(1, 11, |_, k| f(times[k]));
        let d = Samples::from_fn(1, 11, |_, k| fp(times[k]));
        let p = PseudoSolutionContinuous::from_samples(DVector::zeros(1), times, v, d).unwrap();
        for t in [-0.93, -0.2, 0.0, 0.37, 0.99] {
            assert!((p.value(t)[0] - f(t)).abs() < 1e-13);
            assert!((p.deriv(t)[0] - fp(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn second_contraction() {
        // y = λ₀ λ₁ e₁ → ∂²y(μ, μ) = 2 μ₀ μ₁
        let t = DMatrix::from_row_slice(1, 4, &[0.0, 1.0, 1.0, 0.0]);
        let mu = DVector::from_vec(vec![2.0, 3.0]);
        assert_eq!(contract2(&t, &mu)[0], 12.0);
    }
}
