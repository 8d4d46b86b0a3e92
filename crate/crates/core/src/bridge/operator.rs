use std::sync::Arc;

use gauss_quad::GaussLegendre;
use nalgebra::DVector;

use crate::linalg::vec_norm;
use crate::shadow::{solve_shadow, BoundEstimates, Grid, Points, ShadowOperator, ShadowResult};
use crate::system::{ContinuousSystem, PseudoSolutionContinuous};
use crate::{Error, Exec, Result, Samples};

use super::{ContinuousKernel, QuadratureScheme};

pub type ContinuousOperator = ShadowOperator<f64, ContinuousKernel>;

/// Cell-averaged ODE residual `|x(b) − x(a) − ∫ₐᵇ (A x + f) ds| / h` over each interior cell.
/// Inside a cell `x` is the cubic Hermite interpolant of the endpoint values with slopes from
/// the right-hand side, so non-smooth coefficients at grid points do not enter any stencil.
pub(crate) fn cell_residual(
    rhs: &dyn Fn(f64, &DVector<f64>) -> DVector<f64>,
    times: &[f64],
    x: &Samples,
    cells: std::ops::Range<usize>,
    rule: &[(f64, f64)],
) -> f64 {
    let mut worst: f64 = 0.0;
    for i in cells {
        let (ta, tb) = (times[i], times[i + 1]);
        let h = tb - ta;
        let (xa, xb) = (x.column(i).into_owned(), x.column(i + 1).into_owned());
        let (da, db) = (rhs(ta, &xa), rhs(tb, &xb));
        let mut integral = DVector::zeros(x.nrows());
        for &(node, wt) in rule {
            let u = 0.5 * (node + 1.0);
            let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
            let h10 = u * (1.0 - u) * (1.0 - u);
            let h01 = u * u * (3.0 - 2.0 * u);
            let h11 = u * u * (u - 1.0);
            let xs = &xa * h00 + &da * (h * h10) + &xb * h01 + &db * (h * h11);
            integral.axpy(0.5 * wt * h, &rhs(ta + u * h, &xs), 1.0);
        }
        worst = worst.max(vec_norm(&(xb - xa - integral)) / h);
    }
    worst
}

impl ShadowOperator<f64, ContinuousKernel> {
    /// Builds the quadrature kernel (fitting a dichotomy when the system has no decay
    /// envelope) and the operator for `y`.
    pub fn continuous(
        sys: &ContinuousSystem,
        y: &PseudoSolutionContinuous,
        scheme: &QuadratureScheme,
        exec: Exec,
    ) -> Result<Self> {
        let kernel = ContinuousKernel::build(sys, scheme, exec)?;
        Self::with_kernel(sys, y, kernel, exec)
    }

    /// Operator for `y` on an existing kernel of the same system.
    pub fn with_kernel(
        sys: &ContinuousSystem,
        y: &PseudoSolutionContinuous,
        kernel: ContinuousKernel,
        exec: Exec,
    ) -> Result<Self> {
        if y.dim() != sys.dim() || y.lambda.len() != sys.f.param_dim() {
            return Err(Error::Dimension {
                what: "pseudo-solution",
                expected: sys.dim(),
                got: y.dim(),
            });
        }
        if kernel.window() != &sys.window {
            return Err(Error::InvalidWindow(
                "kernel built for another window".into(),
            ));
        }
        let d = sys.dim();
        let nodes = kernel.nodes().to_vec();
        let col = |f: &(dyn Fn(f64) -> nalgebra::DVector<f64> + Sync)| -> Samples {
            crate::linalg::stack(&exec.map(nodes.len(), |k| f(nodes[k])), d)
        };
        let jets = match &y.jets {
            Some(j) => {
                let m = |f: &crate::linear::MatrixFn| exec.map(nodes.len(), |k| f(nodes[k]));
                Some(crate::shadow::PointJets {
                    d1: m(&j.dy),
                    d1next: m(&j.dyp),
                    d2: m(&j.d2y),
                    d2next: m(&j.d2yp),
                })
            }
            None => None,
        };
        let points = Points {
            a: exec.map(nodes.len(), |k| sys.lin.matrix(nodes[k])),
            y: col(&|t| y.value(t)),
            ynext: col(&|t| y.deriv(t)),
            eps: nodes.iter().map(|&s| (sys.eps)(s)).collect(),
            lambda: y.lambda.clone(),
            jets,
            t: nodes,
        };
        let times = sys.window.times();
        let y_grid =
            crate::linalg::stack(&times.iter().map(|&t| y.value(t)).collect::<Vec<_>>(), d);
        let s = sys.clone();
        let lambda = y.lambda.clone();
        let rule = GaussLegendre::new(6)
            .map_err(|e| Error::Quadrature(e.to_string()))?
            .as_node_weight_pairs()
            .to_vec();
        let residual = Arc::new(move |x: &Samples| -> Result<f64> {
            let w = s.window;
            let cols = w.interior_cols();
            let rhs = |t: f64, x: &DVector<f64>| s.lin.matrix(t) * x + s.f.eval(t, x, &lambda);
            Ok(cell_residual(
                &rhs,
                &times,
                x,
                cols.start..cols.end - 1,
                &rule,
            ))
        });
        Ok(Self {
            f: sys.f.clone(),
            points,
            bounds: kernel.bounds().clone(),
            green: kernel,
            grid: Grid::Continuous(sys.window),
            y_grid,
            deriv_bound: sys.deriv_bound,
            exec,
            residual,
        })
    }
}

/// Quadrature estimates of `q` and `L`; fails when `q ≥ 1`.
pub fn estimate_bounds_continuous(
    sys: &ContinuousSystem,
    scheme: &QuadratureScheme,
    exec: Exec,
) -> Result<BoundEstimates> {
    let k = ContinuousKernel::build(sys, scheme, exec)?;
    k.bounds().require_contraction()?;
    Ok(k.bounds().clone())
}

/// One application of `T_λ` on grid samples `z` (builds the kernel; reuse a
/// [`ContinuousOperator`] for repeated use).
pub fn apply_t_continuous(
    sys: &ContinuousSystem,
    y: &PseudoSolutionContinuous,
    z: &Samples,
    scheme: &QuadratureScheme,
    exec: Exec,
) -> Result<Samples> {
    ContinuousOperator::continuous(sys, y, scheme, exec)?.apply(z)
}

pub fn solve_shadow_continuous(
    sys: &ContinuousSystem,
    y: &PseudoSolutionContinuous,
    scheme: &QuadratureScheme,
    tol: f64,
    max_iter: usize,
    exec: Exec,
) -> Result<ShadowResult> {
    let op = ContinuousOperator::continuous(sys, y, scheme, exec)?;
    solve_shadow(&op, tol, max_iter)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule() -> Vec<(f64, f64)> {
        GaussLegendre::new(6)
            .unwrap()
            .as_node_weight_pairs()
            .to_vec()
    }

    #[test]
    fn exact_solution_has_small_residual_despite_kink() {
        // x' = −|t|·x has the solution e^{−t|t|/2}, whose second derivative jumps at t = 0
        let h = 0.05;
        let times: Vec<f64> = (0..41).map(|k| -1.0 + h * k as f64).collect();
        let x = Samples::from_fn(1, 41, |_, k| (-0.5 * times[k] * times[k].abs()).exp());
        let rhs = |t: f64, x: &DVector<f64>| x * -t.abs();
        let r = cell_residual(&rhs, &times, &x, 0..40, &rule());
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn perturbed_solution_is_detected() {
        let h = 0.05;
        let times: Vec<f64> = (0..81).map(|k| -2.0 + h * k as f64).collect();
        let mut x = Samples::from_fn(1, 81, |_, k| (-times[k]).exp());
        x[(0, 40)] += 1e-4;
        let rhs = |_: f64, x: &DVector<f64>| -x;
        let r = cell_residual(&rhs, &times, &x, 0..80, &rule());
        assert!(r > 1e-3, "{r}");
    }
}
