//! First and second directional λ-derivatives of the shadow correction, from the affine
//! fixed-point equations `w = ∂_zT·w + source`, plus finite-difference cross-checks.

use std::ops::Range;

use nalgebra::DVector;
use serde::Serialize;

use crate::bridge::{ContinuousKernel, ContinuousOperator};
use crate::linalg::{sup_dist, sup_dist_cols};
use crate::shadow::{
    picard, solve_shadow, DiscreteOperator, Green, HighDerivativeDiagnostic, ShadowOperator,
    ShadowResult,
};
use crate::system::{ContinuousFamily, ContinuousSystem, DiscreteFamily, DiscreteSystem};
use crate::{Error, Exec, Result, Samples};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum JetStatus {
    Verified,
    /// The second-derivative growth diagnostic failed somewhere along the orbit.
    UnverifiedHypotheses,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParameterJet {
    #[serde(serialize_with = "crate::linalg::ser_vec")]
    pub lambda: DVector<f64>,
    #[serde(serialize_with = "crate::linalg::ser_vec")]
    pub mu: DVector<f64>,
    /// `Dz·μ` on the grid.
    #[serde(skip)]
    pub w1: Samples,
    /// `D²z(μ, μ)` on the grid.
    #[serde(skip)]
    pub w2: Option<Samples>,
    pub residual_1: f64,
    pub residual_2: Option<f64>,
    pub iterations_1: usize,
    pub iterations_2: Option<usize>,
    pub status: JetStatus,
    pub diagnostic: HighDerivativeDiagnostic,
}

/// Solves `w = J w + b` for the linear map `J` by Picard from `w₀ = 0`; returns `w`, the
/// residual `‖w − J w − b‖∞` and the iteration count.
fn solve_affine(
    j: impl Fn(&Samples) -> Result<Samples>,
    b: &Samples,
    q: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(Samples, f64, usize)> {
    let tr = picard(
        |w| Ok(j(w)? + b),
        Samples::zeros(b.nrows(), b.ncols()),
        q,
        tol,
        max_iter,
    )?;
    let residual = sup_dist(&tr.z, &(j(&tr.z)? + b));
    Ok((tr.z, residual, tr.iterations))
}

fn check_shadow<T: Copy + Send + Sync, G: Green>(
    op: &ShadowOperator<T, G>,
    shadow: &ShadowResult,
) -> Result<()> {
    if shadow.z.ncols() != op.len() || shadow.z.nrows() != op.dim() {
        return Err(Error::WindowMismatch {
            expected: op.len(),
            got: shadow.z.ncols(),
        });
    }
    Ok(())
}

/// `w1 = (Id − ∂_zT)⁻¹ ∂_λT·μ` at the shadow correction, applied by Picard iteration.
pub fn solve_jet1<T: Copy + Send + Sync, G: Green>(
    op: &ShadowOperator<T, G>,
    shadow: &ShadowResult,
    mu: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<ParameterJet> {
    check_shadow(op, shadow)?;
    op.bounds.require_contraction()?;
    let jac = op.jacobians(&shadow.z)?;
    let b = op.apply_dlambda(&shadow.z, mu)?;
    let (w1, residual_1, iterations_1) = solve_affine(
        |w| op.apply_dz_with(&jac, w),
        &b,
        op.bounds.q,
        tol,
        max_iter,
    )?;
    let diagnostic = op.high_derivative_diagnostic(&shadow.z, mu)?;
    Ok(ParameterJet {
        lambda: op.lambda().clone(),
        mu: mu.clone(),
        w1,
        w2: None,
        residual_1,
        residual_2: None,
        iterations_1,
        iterations_2: None,
        status: if diagnostic.holds {
            JetStatus::Verified
        } else {
            JetStatus::UnverifiedHypotheses
        },
        diagnostic,
    })
}

/// `w2 = (Id − ∂_zT)⁻¹[∂²_λλT(μ,μ) + 2∂²_λzT(μ, w1) + ∂²_zzT(w1, w1)]`, with the second
/// λ-derivatives of the pseudo-orbit included in the source.
pub fn solve_jet2<T: Copy + Send + Sync, G: Green>(
    op: &ShadowOperator<T, G>,
    shadow: &ShadowResult,
    jet1: &ParameterJet,
    tol: f64,
    max_iter: usize,
) -> Result<ParameterJet> {
    check_shadow(op, shadow)?;
    op.bounds.require_contraction()?;
    if !(jet1.residual_1 <= tol) {
        return Err(Error::InvalidParameter(format!(
            "first jet residual {} exceeds the tolerance {tol}",
            jet1.residual_1
        )));
    }
    let mu = &jet1.mu;
    let jac = op.jacobians(&shadow.z)?;
    let src = op.second_source(&shadow.z, &jet1.w1, mu)?;
    let (w2, r2, it2) = solve_affine(
        |w| op.apply_dz_with(&jac, w),
        &src,
        op.bounds.q,
        tol,
        max_iter,
    )?;
    let mut jet = jet1.clone();
    jet.w2 = Some(w2);
    jet.residual_2 = Some(r2);
    jet.iterations_2 = Some(it2);
    Ok(jet)
}

/// Central differences of the correction `z_λ` along `μ` from full shadow solves:
/// `(z_{λ+hμ} − z_{λ−hμ})/(2h)` or `(z_{λ+hμ} − 2z_λ + z_{λ−hμ})/h²`.
pub fn fd_combine(
    solve: impl Fn(&DVector<f64>) -> Result<Samples>,
    lambda: &DVector<f64>,
    mu: &DVector<f64>,
    h: f64,
    order: usize,
) -> Result<Samples> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "FD step must be > 0, got {h}"
        )));
    }
    let zp = solve(&(lambda + mu * h))?;
    let zm = solve(&(lambda - mu * h))?;
    match order {
        1 => Ok((zp - zm) / (2.0 * h)),
        2 => {
            let z0 = solve(lambda)?;
            Ok((zp - z0 * 2.0 + zm) / (h * h))
        }
        o => Err(Error::InvalidParameter(format!(
            "FD order must be 1 or 2, got {o}"
        ))),
    }
}

/// Finite-difference jet of a discrete problem, re-solving with pseudo-orbits from `family`.
#[allow(clippy::too_many_arguments)]
pub fn fd_jet_oracle_discrete(
    sys: &DiscreteSystem,
    family: &DiscreteFamily,
    lambda: &DVector<f64>,
    mu: &DVector<f64>,
    h: f64,
    order: usize,
    tol: f64,
    exec: Exec,
) -> Result<Samples> {
    let solve = |l: &DVector<f64>| -> Result<Samples> {
        let op = DiscreteOperator::discrete(sys, &family(l)?, exec)?;
        Ok(solve_shadow(&op, tol, 10_000)?.z)
    };
    fd_combine(solve, lambda, mu, h, order)
}

/// Finite-difference jet of a continuous problem on a fixed quadrature kernel.
#[allow(clippy::too_many_arguments)]
pub fn fd_jet_oracle_continuous(
    sys: &ContinuousSystem,
    family: &ContinuousFamily,
    kernel: &ContinuousKernel,
    lambda: &DVector<f64>,
    mu: &DVector<f64>,
    h: f64,
    order: usize,
    tol: f64,
    exec: Exec,
) -> Result<Samples> {
    let solve = |l: &DVector<f64>| -> Result<Samples> {
        let op = ContinuousOperator::with_kernel(sys, &family(l)?, kernel.clone(), exec)?;
        Ok(solve_shadow(&op, tol, 10_000)?.z)
    };
    fd_combine(solve, lambda, mu, h, order)
}

/// Error of two finite-difference approximations with steps `h` and `h/2` against a jet.
#[derive(Debug, Clone, Serialize)]
pub struct RichardsonCheck {
    pub h: f64,
    pub err_h: f64,
    pub err_half: f64,
    /// `err_h / err_half`; about 4 for central differences.
    pub ratio: f64,
    /// Errors below this are rounding and solver noise; the ratio is then uninformative.
    pub noise_floor: f64,
    pub below_noise: bool,
    pub passed: bool,
}

impl RichardsonCheck {
    pub fn new(
        jet: &Samples,
        fd_h: &Samples,
        fd_half: &Samples,
        cols: Range<usize>,
        h: f64,
        noise_floor: f64,
    ) -> Self {
        let err_h = sup_dist_cols(jet, fd_h, cols.clone());
        let err_half = sup_dist_cols(jet, fd_half, cols);
        let ratio = err_h / err_half;
        let below_noise = err_h <= noise_floor;
        Self {
            h,
            err_h,
            err_half,
            ratio,
            noise_floor,
            below_noise,
            passed: (3.5..=4.5).contains(&ratio) || below_noise,
        }
    }
}

/// Noise floor for a central difference with step `h` of solves converged to `tol`.
pub fn fd_noise_floor(tol: f64, h: f64) -> f64 {
    (100.0 * tol / h).max(1e-9)
}
