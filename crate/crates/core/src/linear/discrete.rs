use nalgebra::{DMatrix, DMatrixView};

use super::{IndexWindow, ProjectionFamily};
use crate::{linalg, Error, Exec, Result};

/// Invertible linear part `(A_n)` over an index window, with cached inverses.
#[derive(Debug, Clone)]
pub struct LinearPartDiscrete {
    dim: usize,
    window: IndexWindow,
    a: Vec<DMatrix<f64>>,
    a_inv: Vec<DMatrix<f64>>,
}

impl LinearPartDiscrete {
    pub fn new<F>(window: IndexWindow, matrix: F) -> Result<Self>
    where
        F: Fn(i64) -> DMatrix<f64>,
    {
        let mut a = Vec::with_capacity(window.len());
        let mut a_inv = Vec::with_capacity(window.len());
        let mut dim = 0;
        for n in window.indices() {
            let m = matrix(n);
            if n == window.lo {
                dim = m.nrows();
                if dim == 0 {
                    return Err(Error::Dimension {
                        what: "A_n",
                        expected: 1,
                        got: 0,
                    });
                }
            }
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::Dimension {
                    what: "A_n",
                    expected: dim,
                    got: m.nrows(),
                });
            }
            let inv = m.clone().try_inverse().ok_or(Error::NotInvertible {
                index: n,
                defect: f64::INFINITY,
            })?;
            let defect = linalg::op_norm(&(&m * &inv - DMatrix::identity(dim, dim)));
            if !(defect <= 1e-10) {
                return Err(Error::NotInvertible { index: n, defect });
            }
            a.push(m);
            a_inv.push(inv);
        }
        Ok(Self {
            dim,
            window,
            a,
            a_inv,
        })
    }

    /// Constant linear part `A_n = a` on the window.
    pub fn constant(window: IndexWindow, a: DMatrix<f64>) -> Result<Self> {
        Self::new(window, move |_| a.clone())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn window(&self) -> &IndexWindow {
        &self.window
    }

    pub fn matrix(&self, n: i64) -> Result<&DMatrix<f64>> {
        Ok(&self.a[self.window.check(n)?])
    }

    pub fn inverse(&self, n: i64) -> Result<&DMatrix<f64>> {
        Ok(&self.a_inv[self.window.check(n)?])
    }

    pub(crate) fn matrix_at(&self, pos: usize) -> &DMatrix<f64> {
        &self.a[pos]
    }
}

/// Cocycle `𝒜(m, n)`: `A_{m−1}⋯A_n` for `m > n`, `Id` for `m = n`, `A_m⁻¹⋯A_{n−1}⁻¹` for `m < n`.
pub fn cocycle(lin: &LinearPartDiscrete, m: i64, n: i64) -> Result<DMatrix<f64>> {
    let w = lin.window();
    w.check(m)?;
    w.check(n)?;
    let mut out = DMatrix::identity(lin.dim(), lin.dim());
    if m > n {
        for k in n..m {
            out = lin.matrix(k)? * out;
        }
    } else {
        for k in m..n {
            out *= lin.inverse(k)?;
        }
    }
    Ok(out)
}

/// Discrete Green kernel `Ĝ(m, n)`.
pub fn green_discrete(
    lin: &LinearPartDiscrete,
    proj: &ProjectionFamily<i64>,
    m: i64,
    n: i64,
) -> Result<DMatrix<f64>> {
    let a = cocycle(lin, m, n)?;
    let p = proj.at(n, lin.dim());
    if m >= n {
        Ok(a * p)
    } else {
        Ok(-(a * (DMatrix::identity(lin.dim(), lin.dim()) - p)))
    }
}

/// Upper bound (in f64 entries) on the dense kernel table; larger windows recompute rows.
const TABLE_BUDGET: usize = 1 << 25;

/// All kernel blocks `Ĝ(m, n)` for `m, n` in the window, stored densely row by row
/// (`m` major) when the window is small enough, recomputed per row otherwise.
#[derive(Debug, Clone)]
pub struct DiscreteKernel {
    dim: usize,
    window: IndexWindow,
    table: Option<Vec<f64>>,
    norms: Option<Vec<f64>>,
    lin: LinearPartDiscrete,
    proj: ProjectionFamily<i64>,
}

impl DiscreteKernel {
    pub fn build(
        lin: &LinearPartDiscrete,
        proj: &ProjectionFamily<i64>,
        exec: Exec,
    ) -> Result<Self> {
        let w = *lin.window();
        proj.check_idempotent(w.indices(), lin.dim())?;
        let d = lin.dim();
        let n = w.len();
        let mut kernel = Self {
            dim: d,
            window: w,
            table: None,
            norms: None,
            lin: lin.clone(),
            proj: proj.clone(),
        };
        if n * n * d * d <= TABLE_BUDGET {
            let rows = exec.map(n, |m| kernel.compute_row(m));
            let mut table = Vec::with_capacity(n * n * d * d);
            let mut norms = Vec::with_capacity(n * n);
            for row in rows {
                for blk in row.chunks(d * d) {
                    norms.push(linalg::op_norm_slice(blk, d));
                }
                table.extend_from_slice(&row);
            }
            kernel.table = Some(table);
            kernel.norms = Some(norms);
        }
        Ok(kernel)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn window(&self) -> &IndexWindow {
        &self.window
    }

    /// Row `m_pos` of the kernel: `n` blocks of `d × d` column-major entries.
    fn compute_row(&self, m_pos: usize) -> Vec<f64> {
        let d = self.dim;
        let len = self.window.len();
        let id = DMatrix::<f64>::identity(d, d);
        let mut row = vec![0.0; len * d * d];
        // n ≤ m: 𝒜(m, n) P_n with 𝒜(m, n) = 𝒜(m, n+1) A_n
        let mut acc = id.clone();
        for n_pos in (0..=m_pos).rev() {
            if n_pos < m_pos {
                acc = &acc * self.lin.matrix_at(n_pos);
            }
            let blk = &acc * self.proj.at(self.window.index(n_pos), d);
            row[n_pos * d * d..(n_pos + 1) * d * d].copy_from_slice(blk.as_slice());
        }
        // n > m: −𝒜(m, n)(Id − P_n) with 𝒜(m, n+1) = 𝒜(m, n) A_n⁻¹
        let mut acc = id.clone();
        for n_pos in m_pos + 1..len {
            acc = &acc * &self.lin.a_inv[n_pos - 1];
            let blk = -(&acc * (&id - self.proj.at(self.window.index(n_pos), d)));
            row[n_pos * d * d..(n_pos + 1) * d * d].copy_from_slice(blk.as_slice());
        }
        row
    }

    /// Calls `f` with the full kernel row of output position `m_pos`.
    pub fn with_row<R>(&self, m_pos: usize, f: impl FnOnce(&[f64]) -> R) -> R {
        let blk = self.dim * self.dim;
        let len = self.window.len();
        match &self.table {
            Some(t) => f(&t[m_pos * len * blk..(m_pos + 1) * len * blk]),
            None => f(&self.compute_row(m_pos)),
        }
    }

    /// Kernel norms `‖Ĝ(m, n)‖` for the row `m_pos`.
    pub fn row_norms(&self, m_pos: usize) -> Vec<f64> {
        let len = self.window.len();
        match &self.norms {
            Some(nm) => nm[m_pos * len..(m_pos + 1) * len].to_vec(),
            None => self.with_row(m_pos, |row| {
                row.chunks(self.dim * self.dim)
                    .map(|b| linalg::op_norm_slice(b, self.dim))
                    .collect()
            }),
        }
    }

    /// Block `Ĝ(m, n)` by window positions.
    pub fn block(&self, m_pos: usize, n_pos: usize) -> DMatrix<f64> {
        let d = self.dim;
        self.with_row(m_pos, |row| {
            DMatrixView::from_slice(&row[n_pos * d * d..(n_pos + 1) * d * d], d, d).into_owned()
        })
    }

    /// Kernel sum `(Σ_{k = lo+1}^{hi} Ĝ(m, k) g_{k−1})_m` for every `m` in the window, where
    /// `forcing` holds `g_j` for `j = lo..hi` as columns (the last column is unused).
    pub fn apply(&self, forcing: &crate::Samples, exec: Exec) -> crate::Samples {
        let d = self.dim;
        let len = self.window.len();
        debug_assert_eq!(forcing.ncols(), len);
        let cols = exec.map(len, |m_pos| {
            self.with_row(m_pos, |row| {
                let mut out = vec![0.0; d];
                for k_pos in 1..len {
                    let blk = &row[k_pos * d * d..(k_pos + 1) * d * d];
                    let g = forcing.column(k_pos - 1);
                    for j in 0..d {
                        let gj = g[j];
                        if gj != 0.0 {
                            for i in 0..d {
                                out[i] += blk[i + j * d] * gj;
                            }
                        }
                    }
                }
                out
            })
        });
        let mut res = crate::Samples::zeros(d, len);
        for (m, c) in cols.into_iter().enumerate() {
            for i in 0..d {
                res[(i, m)] = c[i];
            }
        }
        res
    }

    /// Weighted kernel sums `Σ_{k = lo+1}^{hi} w_{k−1} ‖Ĝ(m, k)‖` for each `m`.
    pub fn weighted_norm_sums(&self, weights: &[f64], exec: Exec) -> Vec<f64> {
        let len = self.window.len();
        exec.map(len, |m_pos| {
            let norms = self.row_norms(m_pos);
            (1..len).map(|k| weights[k - 1] * norms[k]).sum()
        })
    }
}
