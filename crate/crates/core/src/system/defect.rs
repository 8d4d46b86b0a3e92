use serde::Serialize;

use crate::linalg::vec_norm;
use crate::{Error, Result};

use super::{ContinuousSystem, DiscreteSystem, PseudoOrbitDiscrete, PseudoSolutionContinuous};

/// Pointwise defects of a pseudo-orbit and their comparison with `ε`.
#[derive(Debug, Clone, Serialize)]
pub struct DefectReport {
    /// Index `n` or time `t` of each sample.
    pub at: Vec<f64>,
    pub defects: Vec<f64>,
    pub sup_defect: f64,
    pub worst_at: f64,
    pub compliant: bool,
}

impl DefectReport {
    fn collect(at: Vec<f64>, defects: Vec<f64>, eps: impl Fn(usize) -> f64) -> Self {
        let mut sup = 0.0;
        let mut worst = at.first().copied().unwrap_or(0.0);
        let mut compliant = true;
        for (k, &d) in defects.iter().enumerate() {
            if d > sup || d.is_nan() {
                sup = d;
                worst = at[k];
            }
            if !(d <= eps(k)) {
                compliant = false;
            }
        }
        Self {
            at,
            defects,
            sup_defect: sup,
            worst_at: worst,
            compliant,
        }
    }
}

/// `‖y_{n+1} − A_n y_n − f_λ(n, y_n)‖` for `n = lo .. hi−1`.
pub fn defect_discrete(sys: &DiscreteSystem, y: &PseudoOrbitDiscrete) -> Result<DefectReport> {
    let w = *sys.window();
    if y.window != w {
        return Err(Error::WindowMismatch {
            expected: w.len(),
            got: y.window.len(),
        });
    }
    if y.dim() != sys.dim() {
        return Err(Error::Dimension {
            what: "pseudo-orbit",
            expected: sys.dim(),
            got: y.dim(),
        });
    }
    let mut at = Vec::with_capacity(w.len() - 1);
    let mut defects = Vec::with_capacity(w.len() - 1);
    for pos in 0..w.len() - 1 {
        let n = w.index(pos);
        let yn = y.at(pos);
        let r = y.values.column(pos + 1) - sys.lin.matrix(n)? * &yn - sys.f.eval(n, &yn, &y.lambda);
        at.push(n as f64);
        defects.push(vec_norm(&r));
    }
    let eps: Vec<f64> = at.iter().map(|&n| (sys.eps)(n as i64)).collect();
    Ok(DefectReport::collect(at, defects, |k| eps[k]))
}

/// `‖y'(t) − A(t)y(t) − f_λ(t, y(t))‖` at the supplied sample times.
pub fn defect_continuous(
    sys: &ContinuousSystem,
    y: &PseudoSolutionContinuous,
    times: &[f64],
) -> Result<DefectReport> {
    if y.dim() != sys.dim() {
        return Err(Error::Dimension {
            what: "pseudo-solution",
            expected: sys.dim(),
            got: y.dim(),
        });
    }
    let defects = times
        .iter()
        .map(|&t| {
            let yt = y.value(t);
            vec_norm(&(y.deriv(t) - sys.lin.matrix(t) * &yt - sys.f.eval(t, &yt, &y.lambda)))
        })
        .collect();
    Ok(DefectReport::collect(times.to_vec(), defects, |k| {
        (sys.eps)(times[k])
    }))
}
