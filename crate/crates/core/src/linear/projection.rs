use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::{linalg, Error, Result};

/// Projection family `P(t)` / `P_n`; the identity when omitted.
#[derive(Clone, Default)]
pub enum ProjectionFamily<T> {
    #[default]
    Identity,
    Constant(DMatrix<f64>),
    Varying(Arc<dyn Fn(T) -> DMatrix<f64> + Send + Sync>),
}

impl<T> std::fmt::Debug for ProjectionFamily<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Identity => write!(f, "Identity"),
            Self::Constant(m) => write!(f, "Constant({m:?})"),
            Self::Varying(_) => write!(f, "Varying(..)"),
        }
    }
}

impl<T: Copy + Debug> ProjectionFamily<T> {
    pub fn at(&self, t: T, dim: usize) -> DMatrix<f64> {
        match self {
            Self::Identity => DMatrix::identity(dim, dim),
            Self::Constant(m) => m.clone(),
            Self::Varying(f) => f(t),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Self::Identity)
    }

    /// Checks `‖P² − P‖∞ ≤ 1e−10` at every supplied point.
    pub fn check_idempotent(&self, points: impl IntoIterator<Item = T>, dim: usize) -> Result<()> {
        for t in points {
            let p = self.at(t, dim);
            if p.nrows() != dim || p.ncols() != dim {
                return Err(Error::Dimension {
                    what: "projection",
                    expected: dim,
                    got: p.nrows(),
                });
            }
            let defect = linalg::op_norm(&(&p * &p - &p));
            if !(defect <= 1e-10) {
                return Err(Error::NotIdempotent {
                    at: format!("{t:?}"),
                    defect,
                });
            }
            if matches!(self, Self::Identity | Self::Constant(_)) {
                break;
            }
        }
        Ok(())
    }
}
