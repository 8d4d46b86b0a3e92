use serde::Serialize;

use crate::linear::{DichotomyCertificate, DiscreteKernel};
use crate::system::{DiscreteSystem, PseudoOrbitDiscrete};
use crate::{Error, Exec, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactWindowSum,
    Quadrature,
}

/// How the part of the kernel sums/integrals outside the computation range is controlled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailStatus {
    /// Bounded through a fitted dichotomy certificate.
    Dichotomy,
    /// Bounded through a supplied exponential decay envelope.
    DecayEnvelope,
    /// No bound available; the truncation is an assumption.
    TailAssumed,
}

#[derive(Debug, Clone, Serialize)]
pub struct Tail {
    pub status: TailStatus,
    /// Bound on the neglected part of the `c`-weighted sum/integral.
    pub q_tail: Option<f64>,
    /// Bound on the neglected part of the `ε`-weighted sum/integral.
    pub l_tail: Option<f64>,
    /// Distance from the interior to the end of the summation/integration range.
    pub cutoff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundEstimates {
    pub q: f64,
    pub l: f64,
    /// `L / (1 − q)`; infinite when `q ≥ 1`.
    pub radius: f64,
    /// Index or time where the sup defining `q` is attained.
    pub sup_attained_at: f64,
    pub l_attained_at: f64,
    pub method: Method,
    pub dichotomy: Option<DichotomyCertificate>,
    pub tail: Tail,
}

impl BoundEstimates {
    pub(crate) fn new(
        (q, q_at): (f64, f64),
        (l, l_at): (f64, f64),
        method: Method,
        tail: Tail,
    ) -> Self {
        Self {
            q,
            l,
            radius: if q < 1.0 {
                l / (1.0 - q)
            } else {
                f64::INFINITY
            },
            sup_attained_at: q_at,
            l_attained_at: l_at,
            method,
            dichotomy: None,
            tail,
        }
    }

    pub fn is_contraction(&self) -> bool {
        self.q < 1.0
    }

    pub fn require_contraction(&self) -> Result<()> {
        if self.is_contraction() {
            Ok(())
        } else {
            Err(Error::NotAContraction {
                q: self.q,
                at: format!("{}", self.sup_attained_at),
            })
        }
    }
}

/// Sup over interior positions of `sums`, with the position attaining it.
pub(crate) fn interior_sup(sums: &[f64], interior: std::ops::Range<usize>) -> (usize, f64) {
    let mut best = (interior.start, f64::NEG_INFINITY);
    for m in interior {
        if sums[m] > best.1 || sums[m].is_nan() {
            best = (m, sums[m]);
        }
    }
    best
}

/// `q̂ = sup_m Σ_n c_{n−1}‖Ĝ(m,n)‖` and `L̂ = sup_m Σ_n ε_{n−1}‖Ĝ(m,n)‖` over interior `m`, with
/// sums running over the whole window.
pub(crate) fn discrete_bounds(
    sys: &DiscreteSystem,
    kernel: &DiscreteKernel,
    dichotomy: Option<&DichotomyCertificate>,
    exec: Exec,
) -> BoundEstimates {
    let w = *sys.window();
    let c: Vec<f64> = w.indices().map(|n| sys.lipschitz(n)).collect();
    let e: Vec<f64> = w.indices().map(|n| (sys.eps)(n)).collect();
    let qs = kernel.weighted_norm_sums(&c, exec);
    let ls = kernel.weighted_norm_sums(&e, exec);
    let (qm, q) = interior_sup(&qs, w.interior_cols());
    let (lm, l) = interior_sup(&ls, w.interior_cols());
    let sup = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let tail = match dichotomy {
        Some(dc) => Tail {
            status: TailStatus::Dichotomy,
            q_tail: Some(2.0 * dc.discrete_tail(w.margin, sup(&c))),
            l_tail: Some(2.0 * dc.discrete_tail(w.margin, sup(&e))),
            cutoff: w.margin as f64,
        },
        None => Tail {
            status: TailStatus::TailAssumed,
            q_tail: None,
            l_tail: None,
            cutoff: w.margin as f64,
        },
    };
    let mut b = BoundEstimates::new(
        (q, w.index(qm) as f64),
        (l, w.index(lm) as f64),
        Method::ExactWindowSum,
        tail,
    );
    b.dichotomy = dichotomy.cloned();
    b
}

/// Window estimates of `q̂`, `L̂` and the radius; fails when `q̂ ≥ 1`.
pub fn estimate_bounds_discrete(
    sys: &DiscreteSystem,
    y: &PseudoOrbitDiscrete,
    exec: Exec,
) -> Result<BoundEstimates> {
    if y.window != *sys.window() {
        return Err(Error::WindowMismatch {
            expected: sys.window().len(),
            got: y.window.len(),
        });
    }
    let kernel = DiscreteKernel::build(&sys.lin, &sys.proj, exec)?;
    let b = discrete_bounds(sys, &kernel, None, exec);
    b.require_contraction()?;
    Ok(b)
}

/// Constants for a dichotomy with constant Lipschitz bound `c` and defect `ε`:
/// `q̃ = 2cD/ρ`, `L̃ = 2εD/ρ` and the bound `L̃/(1 − q̃)`.
pub fn hyers_ulam_constants(c: f64, eps: f64, d: f64, rho: f64) -> Result<(f64, f64, f64)> {
    if !(c >= 0.0) || !(eps > 0.0) || !(d > 0.0) || !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need c ≥ 0, ε > 0, D > 0, ρ > 0; got c = {c}, ε = {eps}, D = {d}, ρ = {rho}"
        )));
    }
    let q = 2.0 * c * d / rho;
    let l = 2.0 * eps * d / rho;
    if q >= 1.0 {
        return Err(Error::NotAContraction {
            q,
            at: "uniform".into(),
        });
    }
    Ok((q, l, l / (1.0 - q)))
}
