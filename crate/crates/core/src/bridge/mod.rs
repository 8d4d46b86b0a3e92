//! Continuous-time operator `T_λ` realized by Gauss–Legendre quadrature over a truncated line,
//! so the shadow solver and the jets run unchanged on differential equations.

mod kernel;
mod operator;

pub use kernel::{ContinuousKernel, QuadratureScheme};
pub use operator::{
    apply_t_continuous, estimate_bounds_continuous, solve_shadow_continuous, ContinuousOperator,
};
