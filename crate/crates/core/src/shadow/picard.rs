use crate::linalg::{sup_dist, sup_norm};
use crate::{Error, Result, Samples};

#[derive(Debug, Clone)]
pub struct PicardTrace {
    pub z: Samples,
    pub iterations: usize,
    /// `‖z_{k+1} − z_k‖∞` per iteration.
    pub steps: Vec<f64>,
    /// Largest measured ratio of consecutive steps (0 with fewer than two usable steps).
    pub measured_ratio: f64,
    /// The measured ratio exceeded the contraction estimate.
    pub ratio_exceeded: bool,
}

impl PicardTrace {
    /// `κ/(1 − κ)·(last step)` with `κ` the larger of the estimate and the measured ratio.
    pub fn aposteriori(&self, q: f64) -> f64 {
        let k = if self.ratio_exceeded {
            self.measured_ratio
        } else {
            q
        };
        let last = self.steps.last().copied().unwrap_or(0.0);
        if k < 1.0 {
            k / (1.0 - k) * last
        } else {
            f64::INFINITY
        }
    }
}

/// Iterates `z ← T z` from `z0` until `q/(1−q)·‖z_{k+1} − z_k‖ ≤ tol`. If a measured step ratio
/// exceeds `q`, the ratio is recorded and the loop stops once `‖z_{k+1} − z_k‖ ≤ tol·(1 − q)`.
pub fn picard(
    mut t: impl FnMut(&Samples) -> Result<Samples>,
    z0: Samples,
    q: f64,
    tol: f64,
    max_iter: usize,
) -> Result<PicardTrace> {
    if !(q < 1.0) {
        return Err(Error::NotAContraction {
            q,
            at: "picard".into(),
        });
    }
    let mut z = z0;
    let mut steps = Vec::new();
    let mut measured: f64 = 0.0;
    let mut exceeded = false;
    for k in 1..=max_iter {
        let next = t(&z)?;
        let step = sup_dist(&next, &z);
        if !step.is_finite() {
            return Err(Error::NonConvergence {
                iterations: k,
                last_step: step,
                steps,
            });
        }
        if let Some(&prev) = steps.last() {
            // ratios of steps near rounding level carry no information
            if prev > 1e-13 * (1.0 + sup_norm(&next)) {
                let r = step / prev;
                measured = measured.max(r);
                if r > q + 1e-12 {
                    exceeded = true;
                }
            }
        }
        steps.push(step);
        z = next;
        let done = if exceeded {
            step <= tol * (1.0 - q)
        } else {
            q / (1.0 - q) * step <= tol
        };
        if done {
            return Ok(PicardTrace {
                z,
                iterations: k,
                steps,
                measured_ratio: measured,
                ratio_exceeded: exceeded,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        last_step: steps.last().copied().unwrap_or(f64::NAN),
        steps,
    })
}
