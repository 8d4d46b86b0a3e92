//! Sampled certification of an exponential dichotomy `‖𝒢(t,s)‖ ≤ D e^{−ρ|t−s|}`.
//!
//! The decay rate is fitted by least squares on `ln‖𝒢‖` against `|t − s|` (pairs with
//! separation at least one time unit), after which `D` is the smallest constant for which the
//! bound holds at every sampled pair.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{EvolutionFamily, LinearPartDiscrete, ProjectionFamily};
use crate::{linalg, Error, Exec, Result};

const MIN_FIT_SEPARATION: f64 = 1.0;
const MIN_RATE: f64 = 1e-8;
const COMMUTATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyCertificate {
    pub d: f64,
    pub rho: f64,
    /// Slack allowed on top of `D e^{−ρ|t−s|}` when the certificate is re-checked.
    pub margin: f64,
    pub grid: SampleGrid,
    /// Largest sampled `‖T(t,s)P(s) − P(t)T(t,s)‖∞ / max(1, ‖T(t,s)‖∞)`.
    pub commutation_defect: f64,
    pub pairs: usize,
}

impl DichotomyCertificate {
    pub fn bound(&self, sep: f64) -> f64 {
        self.d * (-self.rho * sep.abs()).exp()
    }

    /// Tail `Σ_{j ≥ m} D e^{−ρ j}` of a kernel sum cut `m` steps away, times `sup_env`.
    pub fn discrete_tail(&self, margin: usize, sup_env: f64) -> f64 {
        self.d * (-self.rho * margin as f64).exp() / (1.0 - (-self.rho).exp()) * sup_env
    }

    /// Tail `∫_{|u| ≥ cut} D e^{−ρ|u|} du` on one side, times `sup_env`.
    pub fn continuous_tail(&self, cut: f64, sup_env: f64) -> f64 {
        self.d / self.rho * (-self.rho * cut).exp() * sup_env
    }
}

struct PairSample {
    t: f64,
    s: f64,
    norm: f64,
}

fn fit(
    samples: &[PairSample],
    grid: SampleGrid,
    commutation_defect: f64,
) -> Result<DichotomyCertificate> {
    let pts: Vec<(f64, f64, usize)> = samples
        .iter()
        .enumerate()
        .filter(|(_, p)| (p.t - p.s).abs() >= MIN_FIT_SEPARATION && p.norm > 0.0)
        .map(|(i, p)| ((p.t - p.s).abs(), p.norm.ln(), i))
        .collect();
    let slowest = |rate: f64| {
        pts.iter()
            .max_by(|a, b| (a.1 + a.0).total_cmp(&(b.1 + b.0)))
            .map(|&(_, _, i)| (samples[i].t, samples[i].s))
            .unwrap_or((grid.lo, grid.lo))
            .pipe(|(t, s)| Error::NoDichotomy { rate, t, s })
    };
    if pts.len() < 2 {
        return Err(slowest(0.0));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx <= 0.0 {
        return Err(slowest(0.0));
    }
    let rho = -sxy / sxx;
    if !(rho > MIN_RATE) {
        return Err(slowest(rho));
    }
    let d = samples
        .iter()
        .map(|p| p.norm * (rho * (p.t - p.s).abs()).exp())
        .fold(0.0, f64::max);
    Ok(DichotomyCertificate {
        d,
        rho,
        margin: 1e-6 * d,
        grid,
        commutation_defect,
        pairs: samples.len(),
    })
}

trait Pipe: Sized {
    fn pipe<R>(self, f: impl FnOnce(Self) -> R) -> R {
        f(self)
    }
}
impl<T> Pipe for T {}

fn commutation(t_op: &DMatrix<f64>, p_s: &DMatrix<f64>, p_t: &DMatrix<f64>) -> f64 {
    linalg::op_norm(&(t_op * p_s - p_t * t_op)) / linalg::op_norm(t_op).max(1.0)
}

/// Dichotomy fit for a discrete linear part over its whole window, sampling every
/// `grid_step`-th index.
pub fn certify_dichotomy_discrete(
    lin: &LinearPartDiscrete,
    proj: &ProjectionFamily<i64>,
    grid_step: usize,
    exec: Exec,
) -> Result<DichotomyCertificate> {
    if grid_step == 0 {
        return Err(Error::InvalidParameter("grid step must be > 0".into()));
    }
    let w = *lin.window();
    let d = lin.dim();
    let id = DMatrix::<f64>::identity(d, d);
    let idx: Vec<i64> = w.indices().step_by(grid_step).collect();
    let rows = exec.try_map(idx.len(), |j| -> Result<(Vec<PairSample>, f64)> {
        let s = idx[j];
        let p_s = proj.at(s, d);
        let mut out = Vec::with_capacity(idx.len());
        let mut worst = 0.0f64;
        // forward: 𝒜(m, s) for m ≥ s
        let mut acc = id.clone();
        let mut cur = s;
        for &m in idx.iter().filter(|&&m| m >= s) {
            while cur < m {
                acc = lin.matrix(cur)? * acc;
                cur += 1;
            }
            worst = worst.max(commutation(&acc, &p_s, &proj.at(m, d)));
            out.push(PairSample {
                t: m as f64,
                s: s as f64,
                norm: linalg::op_norm(&(&acc * &p_s)),
            });
        }
        // backward: 𝒜(m, s) for m < s
        let mut acc = id.clone();
        let mut cur = s;
        for &m in idx.iter().rev().filter(|&&m| m < s) {
            while cur > m {
                acc = lin.inverse(cur - 1)? * acc;
                cur -= 1;
            }
            worst = worst.max(commutation(&acc, &p_s, &proj.at(m, d)));
            out.push(PairSample {
                t: m as f64,
                s: s as f64,
                norm: linalg::op_norm(&(&acc * (&id - &p_s))),
            });
        }
        Ok((out, worst))
    })?;
    finish(
        rows,
        SampleGrid {
            lo: w.lo as f64,
            hi: w.hi as f64,
            step: grid_step as f64,
        },
    )
}

fn finish(rows: Vec<(Vec<PairSample>, f64)>, grid: SampleGrid) -> Result<DichotomyCertificate> {
    let mut worst = (0.0f64, 0.0, 0.0);
    let mut samples = Vec::new();
    for (row, w) in rows {
        if w > worst.0 {
            let p = &row[0];
            worst = (w, p.t, p.s);
        }
        samples.extend(row);
    }
    if worst.0 > COMMUTATION_TOL {
        return Err(Error::ProjectionNotInvariant {
            defect: worst.0,
            t: worst.1,
            s: worst.2,
        });
    }
    fit(&samples, grid, worst.0)
}

/// Dichotomy fit for a continuous linear part on `[lo, hi]`, sampling times `lo + k·grid_step`.
pub fn certify_dichotomy_continuous(
    evo: &EvolutionFamily,
    proj: &ProjectionFamily<f64>,
    lo: f64,
    hi: f64,
    grid_step: f64,
    exec: Exec,
) -> Result<DichotomyCertificate> {
    if !(grid_step > 0.0) || !(lo < hi) {
        return Err(Error::InvalidParameter(format!(
            "need grid_step > 0 and lo < hi (got {grid_step}, [{lo}, {hi}])"
        )));
    }
    let d = evo.dim();
    let id = DMatrix::<f64>::identity(d, d);
    let n = ((hi - lo) / grid_step + 1e-9).floor() as usize + 1;
    let times: Vec<f64> = (0..n).map(|k| lo + k as f64 * grid_step).collect();
    let fwd = exec.try_map(n - 1, |k| evo.evolution(times[k + 1], times[k]))?;
    let bwd = exec.try_map(n - 1, |k| evo.evolution(times[k], times[k + 1]))?;
    let projs: Vec<DMatrix<f64>> = times.iter().map(|&t| proj.at(t, d)).collect();
    let rows = exec.map(n, |j| {
        let p_s = &projs[j];
        let mut out = Vec::with_capacity(n);
        let mut worst = 0.0f64;
        let mut acc = id.clone();
        for k in j..n {
            if k > j {
                acc = &fwd[k - 1] * acc;
            }
            worst = worst.max(commutation(&acc, p_s, &projs[k]));
            out.push(PairSample {
                t: times[k],
                s: times[j],
                norm: linalg::op_norm(&(&acc * p_s)),
            });
        }
        let mut acc = id.clone();
        for k in (0..j).rev() {
            acc = &bwd[k] * acc;
            worst = worst.max(commutation(&acc, p_s, &projs[k]));
            out.push(PairSample {
                t: times[k],
                s: times[j],
                norm: linalg::op_norm(&(&acc * (&id - p_s))),
            });
        }
        (out, worst)
    });
    finish(
        rows,
        SampleGrid {
            lo,
            hi,
            step: grid_step,
        },
    )
}
