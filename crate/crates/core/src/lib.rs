//! Shadowing of nonautonomous semilinear difference and differential equations.
//!
//! Given an approximate solution `y` of
//!
//! ```text
//! x_{n+1} = A_n x_n + f_λ(n, x_n)        or        x' = A(t) x + f_λ(t, x)
//! ```
//!
//! the crate builds the Green-kernel fixed-point operator `T_λ`, certifies that it is a
//! contraction with constant `q < 1`, and computes the correction `z` such that `x = y + z`
//! is an exact solution with `‖z‖∞ ≤ L / (1 − q)`. Directional first and second derivatives
//! of `z` with respect to the parameter are obtained from the affine fixed-point equations
//! obtained by differentiating `z = T_λ z`.
//!
//! Module map:
//!
//! * [`linear`]: cocycles, evolution families, projections, Green kernels, dichotomy fits.
//! * [`system`]: nonlinearities, pseudo-orbits, defects, CSV ingestion and the example gallery.
//! * [`shadow`]: contraction constants, the discrete operator and the Picard solver.
//! * [`bridge`]: quadrature realisation of the continuous-time operator.
//! * [`jets`]: parameter derivatives of the shadow correction and finite-difference oracles.

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::len_without_is_empty
)]

pub mod bridge;
pub mod error;
pub mod exec;
pub mod jets;
pub mod linalg;
pub mod linear;
pub mod shadow;
pub mod system;

pub use error::{Error, Result};
pub use exec::Exec;

/// Column-stacked samples of an `ℝ^d`-valued sequence or grid function (`d × N`).
pub type Samples = nalgebra::DMatrix<f64>;
pub use nalgebra::{DMatrix, DVector};
