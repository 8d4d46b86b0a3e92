use std::ops::Range;

use serde::Serialize;

use crate::linalg::{sup_dist, sup_norm, sup_norm_cols};
use crate::linear::{IndexWindow, TimeWindow};
use crate::system::{DiscreteSystem, PseudoOrbitDiscrete};
use crate::{Error, Exec, Result, Samples};

use super::operator::{DiscreteOperator, Green, ShadowOperator};
use super::picard::picard;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Grid {
    Discrete(IndexWindow),
    Continuous(TimeWindow),
}

impl Grid {
    pub fn len(&self) -> usize {
        match self {
            Self::Discrete(w) => w.len(),
            Self::Continuous(w) => w.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn interior_cols(&self) -> Range<usize> {
        match self {
            Self::Discrete(w) => w.interior_cols(),
            Self::Continuous(w) => w.interior_cols(),
        }
    }

    /// Index or time of each grid sample.
    pub fn keys(&self) -> Vec<f64> {
        match self {
            Self::Discrete(w) => w.indices().map(|n| n as f64).collect(),
            Self::Continuous(w) => w.times(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShadowResult {
    #[serde(skip)]
    pub grid: Grid,
    #[serde(skip)]
    pub z: Samples,
    #[serde(skip)]
    pub x: Samples,
    pub iterations: usize,
    pub step_history: Vec<f64>,
    /// `‖T z − z‖∞` at the returned `z`.
    pub residual: f64,
    pub aposteriori_bound: f64,
    pub measured_ratio: f64,
    pub ratio_exceeded: bool,
    /// `‖z‖∞` over the interior.
    pub sup_z: f64,
    /// `‖z‖∞` over the whole window.
    pub sup_z_window: f64,
    pub radius: f64,
    pub q: f64,
    /// Residual of the orbit equation for `x = y + z` on the interior.
    pub equation_residual: f64,
}

/// Picard iteration from `z₀ = 0`, then the residual and orbit-equation checks.
pub fn solve_shadow<T: Copy + Send + Sync, G: Green>(
    op: &ShadowOperator<T, G>,
    tol: f64,
    max_iter: usize,
) -> Result<ShadowResult> {
    solve_from(op, Samples::zeros(op.dim(), op.len()), tol, max_iter)
}

pub(crate) fn solve_from<T: Copy + Send + Sync, G: Green>(
    op: &ShadowOperator<T, G>,
    z0: Samples,
    tol: f64,
    max_iter: usize,
) -> Result<ShadowResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be > 0, got {tol}"
        )));
    }
    op.bounds.require_contraction()?;
    let q = op.bounds.q;
    let tr = picard(|z| op.apply(z), z0, q, tol, max_iter)?;
    let residual = sup_dist(&op.apply(&tr.z)?, &tr.z);
    let aposteriori_bound = tr.aposteriori(q);
    let equation_residual = op.equation_residual(&tr.z)?;
    let x = &op.y_grid + &tr.z;
    Ok(ShadowResult {
        grid: op.grid,
        sup_z: sup_norm_cols(&tr.z, op.interior()),
        sup_z_window: sup_norm(&tr.z),
        x,
        iterations: tr.iterations,
        step_history: tr.steps,
        residual,
        aposteriori_bound,
        measured_ratio: tr.measured_ratio,
        ratio_exceeded: tr.ratio_exceeded,
        radius: op.bounds.radius,
        q,
        equation_residual,
        z: tr.z,
    })
}

/// Builds the discrete operator and solves.
pub fn solve_shadow_discrete(
    sys: &DiscreteSystem,
    y: &PseudoOrbitDiscrete,
    tol: f64,
    max_iter: usize,
    exec: Exec,
) -> Result<ShadowResult> {
    let op = DiscreteOperator::discrete(sys, y, exec)?;
    solve_shadow(&op, tol, max_iter)
}

/// Runs Picard from every seed (each inside the ball of radius `L/(1 − q)`) and returns the
/// largest pairwise sup-distance between the limits.
pub fn uniqueness_probe<T: Copy + Send + Sync, G: Green>(
    op: &ShadowOperator<T, G>,
    seeds: &[Samples],
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    op.bounds.require_contraction()?;
    let radius = op.bounds.radius;
    let mut limits = Vec::with_capacity(seeds.len());
    for s in seeds {
        let norm = sup_norm(s);
        if norm > radius * (1.0 + 1e-12) {
            return Err(Error::SeedOutsideBall { norm, radius });
        }
        limits.push(solve_from(op, s.clone(), tol, max_iter)?.z);
    }
    let mut spread: f64 = 0.0;
    for i in 0..limits.len() {
        for j in i + 1..limits.len() {
            spread = spread.max(sup_dist(&limits[i], &limits[j]));
        }
    }
    Ok(spread)
}

impl ShadowResult {
    pub fn bounds_respected(&self, slack: f64) -> bool {
        self.sup_z <= self.radius + slack
    }
}
