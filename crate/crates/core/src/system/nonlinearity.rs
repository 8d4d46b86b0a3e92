use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

/// Envelope `t ↦ c(t)` or `t ↦ ε(t)`.
pub type Envelope<T> = Arc<dyn Fn(T) -> f64 + Send + Sync>;

/// Parameterised nonlinearity `f_λ(t, x)` on `ℝ^d` with parameter `λ ∈ ℝ^p`, its first and
/// second partial derivatives, and its Lipschitz envelope `c`.
///
/// `T` is `i64` for difference equations and `f64` for differential equations. Implementations
/// must be pure; they are called concurrently.
pub trait Nonlinearity<T: Copy>: Send + Sync {
    fn dim(&self) -> usize;
    fn param_dim(&self) -> usize;

    fn eval(&self, t: T, x: &DVector<f64>, lambda: &DVector<f64>) -> DVector<f64>;

    /// `∂f/∂x` (`d × d`).
    fn dx(&self, t: T, x: &DVector<f64>, lambda: &DVector<f64>) -> DMatrix<f64>;

    /// `∂f/∂λ` (`d × p`).
    fn dlambda(&self, t: T, x: &DVector<f64>, lambda: &DVector<f64>) -> DMatrix<f64>;

    /// `∂²f/∂x²(u, v)`.
    fn dxx(
        &self,
        t: T,
        x: &DVector<f64>,
        lambda: &DVector<f64>,
        u: &DVector<f64>,
        v: &DVector<f64>,
    ) -> DVector<f64>;

    /// `∂²f/∂x∂λ(u, μ)` with `u ∈ ℝ^d`, `μ ∈ ℝ^p`.
    fn dxlambda(
        &self,
        t: T,
        x: &DVector<f64>,
        lambda: &DVector<f64>,
        u: &DVector<f64>,
        mu: &DVector<f64>,
    ) -> DVector<f64>;

    /// `∂²f/∂λ²(μ, ν)`.
    fn dlambdalambda(
        &self,
        t: T,
        x: &DVector<f64>,
        lambda: &DVector<f64>,
        mu: &DVector<f64>,
        nu: &DVector<f64>,
    ) -> DVector<f64>;

    /// Lipschitz envelope `c(t)` in `x`, uniform in `λ`.
    fn lipschitz(&self, t: T) -> f64;
}
