use std::ops::Range;
use std::sync::Arc;

use gauss_quad::GaussLegendre;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::linalg::op_norm;
use crate::linear::{certify_dichotomy_continuous, EvolutionFamily, TimeWindow};
use crate::shadow::{BoundEstimates, Green, Method, Tail, TailStatus};
use crate::system::ContinuousSystem;
use crate::{Error, Exec, Result, Samples};

/// Discretization of the kernel integrals. Panels tile every grid cell, so each output time is
/// a panel endpoint and the kink of the kernel at `s = t` never falls inside a panel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureScheme {
    /// Gauss–Legendre nodes per panel.
    pub gauss_order: usize,
    /// Panels per grid cell; the panel width is the grid step divided by this.
    pub panels_per_cell: usize,
    /// Target for the neglected tail of the kernel integrals.
    pub tail_tol: f64,
    /// Extension beyond the window used when neither a dichotomy nor a decay envelope bounds
    /// the tail.
    pub tail_cutoff: Option<f64>,
    /// Upper limit for the extension on each side.
    pub max_extension: f64,
    /// Sample spacing for the dichotomy fit.
    pub dichotomy_step: f64,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        Self {
            gauss_order: 8,
            panels_per_cell: 1,
            tail_tol: 1e-12,
            tail_cutoff: None,
            max_extension: 200.0,
            dichotomy_step: 0.5,
        }
    }
}

impl QuadratureScheme {
    pub fn panel_width(&self, window: &TimeWindow) -> f64 {
        window.step / self.panels_per_cell as f64
    }

    fn validate(&self) -> Result<()> {
        if self.gauss_order < 2 || self.panels_per_cell == 0 {
            return Err(Error::Quadrature(format!(
                "need Gauss order ≥ 2 and at least one panel per cell, got {} and {}",
                self.gauss_order, self.panels_per_cell
            )));
        }
        if !(self.tail_tol > 0.0) || !(self.max_extension >= 0.0) || !(self.dichotomy_step > 0.0) {
            return Err(Error::Quadrature(
                "tail_tol, max_extension and dichotomy_step must be positive".into(),
            ));
        }
        Ok(())
    }
}

struct Data {
    dim: usize,
    window: TimeWindow,
    /// Extended grid `τ_j = origin + j·h`, `j = 0..=cells`; window sample `i` is `τ_{offset+i}`.
    origin: f64,
    offset: usize,
    cells: usize,
    per_cell: usize,
    identity: bool,
    /// `T(τ_{j+1}, τ_j)` and `T(τ_j, τ_{j+1})`.
    forward: Vec<DMatrix<f64>>,
    backward: Vec<DMatrix<f64>>,
    node_t: Vec<f64>,
    node_w: Vec<f64>,
    /// `T(τ_{j+1}, s)P(s)` and `T(τ_j, s)(Id − P(s))` for node `s` in cell `j`.
    plus: Vec<DMatrix<f64>>,
    minus: Vec<DMatrix<f64>>,
    /// Lagrange stencil into the window grid; `None` outside the window.
    stencil: Vec<Option<(usize, [f64; STENCIL])>>,
    bounds: BoundEstimates,
}

/// Quadrature form of `z ↦ ∫ 𝒢(t, s) g(s) ds` on the window grid, with the contraction data
/// `q = sup_t ∫ c‖𝒢‖` and `L = sup_t ∫ ε‖𝒢‖` computed at build time. Cheap to clone.
#[derive(Clone)]
pub struct ContinuousKernel(Arc<Data>);

impl std::fmt::Debug for ContinuousKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ContinuousKernel")
            .field("window", &self.0.window)
            .field("range", &self.range())
            .field("nodes", &self.0.node_t.len())
            .finish()
    }
}

/// Points per interpolation stencil.
const STENCIL: usize = 6;

fn lagrange(window: &TimeWindow, starts: &[usize], s: f64) -> Option<(usize, [f64; STENCIL])> {
    let slack = 1e-12 * window.step;
    if s < window.lo - slack || s > window.hi + slack {
        return None;
    }
    let len = window.len();
    let cell = (((s - window.lo) / window.step).floor().max(0.0) as usize).min(len - 2);
    let start = starts[cell];
    let t: [f64; STENCIL] = std::array::from_fn(|k| window.time(start + k));
    let w = std::array::from_fn(|k| {
        (0..STENCIL)
            .filter(|&m| m != k)
            .map(|m| (s - t[m]) / (t[k] - t[m]))
            .product()
    });
    Some((start, w))
}

/// First column of the interpolation stencil of each window cell. The centred stencil is
/// replaced by a shifted one when the coefficients (`A`, the Lipschitz envelope and `ε`) have a
/// much smaller highest-order difference there, which keeps a kink of the data at a grid point
/// out of the stencil interior.
fn cell_stencils(sys: &ContinuousSystem) -> Vec<usize> {
    let w = &sys.window;
    let len = w.len();
    let d = sys.dim();
    let times = w.times();
    let mut signals: Vec<Vec<f64>> = vec![Vec::with_capacity(len); d * d + 2];
    for &t in &times {
        let a = sys.lin.matrix(t);
        for (k, v) in a.iter().enumerate() {
            signals[k].push(*v);
        }
        signals[d * d].push(sys.lipschitz(t));
        signals[d * d + 1].push((sys.eps)(t));
    }
    let scales: Vec<f64> = signals
        .iter()
        .map(|s| {
            s.iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
                .max(f64::MIN_POSITIVE)
        })
        .collect();
    // binomial weights of the (STENCIL − 1)-th difference
    let mut binom = vec![1.0f64];
    for _ in 1..STENCIL {
        let mut next = vec![1.0; binom.len() + 1];
        for k in 1..binom.len() {
            next[k] = binom[k - 1] + binom[k];
        }
        binom = next;
    }
    let score = |start: usize| -> f64 {
        signals
            .iter()
            .zip(&scales)
            .map(|(s, sc)| {
                let diff: f64 = binom
                    .iter()
                    .enumerate()
                    .map(|(k, &b)| if k % 2 == 0 { b } else { -b } * s[start + k])
                    .sum();
                diff.abs() / sc
            })
            .sum()
    };
    (0..len - 1)
        .map(|cell| {
            let last = len - STENCIL;
            let centred = cell.saturating_sub(STENCIL / 2 - 1).min(last);
            let base = score(centred);
            let lo = cell.saturating_sub(STENCIL - 2).min(last);
            let hi = cell.min(last);
            let (best, val) = (lo..=hi)
                .map(|st| (st, score(st)))
                .fold((centred, base), |b, c| if c.1 < b.1 { c } else { b });
            if base > 1e-12 && val < 0.25 * base {
                best
            } else {
                centred
            }
        })
        .collect()
}

/// `∫` of `K e^{−a|s|}` over `(−∞, x]`.
fn decay_mass_left(x: f64, a: f64) -> f64 {
    if x <= 0.0 {
        (a * x).exp() / a
    } else {
        (2.0 - (-a * x).exp()) / a
    }
}

impl ContinuousKernel {
    pub fn build(sys: &ContinuousSystem, scheme: &QuadratureScheme, exec: Exec) -> Result<Self> {
        scheme.validate()?;
        let w = sys.window;
        if w.len() < STENCIL {
            return Err(Error::InvalidWindow(format!(
                "need at least {STENCIL} grid samples"
            )));
        }
        let d = sys.dim();
        let h = w.step;
        let identity = sys.proj.is_identity();
        let times = w.times();
        let sup_c = times.iter().map(|&t| sys.lipschitz(t)).fold(0.0, f64::max);
        let sup_e = times.iter().map(|&t| (sys.eps)(t)).fold(0.0, f64::max);

        let dichotomy = match sys.decay {
            Some(_) => None,
            None => {
                let evo = EvolutionFamily::covering(sys.lin.clone(), w.lo, w.hi, h);
                match certify_dichotomy_continuous(
                    &evo,
                    &sys.proj,
                    w.lo,
                    w.hi,
                    scheme.dichotomy_step,
                    exec,
                ) {
                    Ok(c) => Some(c),
                    Err(Error::NoDichotomy { .. }) => None,
                    Err(e) => return Err(e),
                }
            }
        };

        let (ext_l, ext_r) = if let Some(dc) = &dichotomy {
            let env = sup_c.max(sup_e);
            let t = if env > 0.0 {
                ((dc.d * env / (scheme.tail_tol * dc.rho)).ln() / dc.rho).max(0.0)
            } else {
                0.0
            };
            (t, t)
        } else if let Some(de) = &sys.decay {
            let t = ((de.kernel_bound * de.scale / (de.rate * scheme.tail_tol)).ln() / de.rate)
                .max(0.0);
            ((w.lo + t).max(0.0), (t - w.hi).max(0.0))
        } else {
            let t = scheme.tail_cutoff.unwrap_or(0.0);
            (t, t)
        };
        let ext_r = if identity { 0.0 } else { ext_r };
        let cells_for = |e: f64| (e.min(scheme.max_extension) / h - 1e-9).ceil().max(0.0) as usize;
        let (kl, kr) = (cells_for(ext_l), cells_for(ext_r));
        let origin = w.lo - kl as f64 * h;
        let cells = kl + w.cells() + kr;
        let tau = |j: usize| origin + j as f64 * h;
        let (s_lo, s_hi) = (origin, tau(cells));

        let tail = if let Some(dc) = &dichotomy {
            let (cl, cr) = (w.margin + kl as f64 * h, w.margin + kr as f64 * h);
            let side = |env: f64| {
                dc.continuous_tail(cl, env)
                    + if identity {
                        0.0
                    } else {
                        dc.continuous_tail(cr, env)
                    }
            };
            Tail {
                status: TailStatus::Dichotomy,
                q_tail: Some(side(sup_c)),
                l_tail: Some(side(sup_e)),
                cutoff: cl.min(if identity { f64::INFINITY } else { cr }),
            }
        } else if let Some(de) = &sys.decay {
            let mass = de.kernel_bound
                * de.scale
                * (decay_mass_left(s_lo, de.rate)
                    + if identity {
                        0.0
                    } else {
                        decay_mass_left(-s_hi, de.rate)
                    });
            Tail {
                status: TailStatus::DecayEnvelope,
                q_tail: Some(mass),
                l_tail: Some(mass),
                cutoff: (w.lo + w.margin - s_lo).min(if identity {
                    f64::INFINITY
                } else {
                    s_hi - w.hi + w.margin
                }),
            }
        } else {
            Tail {
                status: TailStatus::TailAssumed,
                q_tail: None,
                l_tail: None,
                cutoff: w.margin + kl as f64 * h,
            }
        };

        let lin = &sys.lin;
        let forward = exec.try_map(cells, |j| lin.integrate(tau(j + 1), tau(j)))?;
        let backward = if identity {
            Vec::new()
        } else {
            exec.try_map(cells, |j| lin.integrate(tau(j), tau(j + 1)))?
        };

        let rule =
            GaussLegendre::new(scheme.gauss_order).map_err(|e| Error::Quadrature(e.to_string()))?;
        let pairs = rule.as_node_weight_pairs().to_vec();
        let ppc = scheme.panels_per_cell;
        let pw = h / ppc as f64;
        let per_cell = ppc * pairs.len();
        let id = DMatrix::<f64>::identity(d, d);
        let per = exec.try_map(cells, |j| -> Result<Vec<_>> {
            let mut out = Vec::with_capacity(per_cell);
            for p in 0..ppc {
                let a = tau(j) + p as f64 * pw;
                for &(x, wt) in &pairs {
                    let s = a + 0.5 * (x + 1.0) * pw;
                    let ps = sys.proj.at(s, d);
                    let plus = lin.integrate(tau(j + 1), s)? * &ps;
                    let minus = if identity {
                        None
                    } else {
                        Some(lin.integrate(tau(j), s)? * (&id - &ps))
                    };
                    out.push((s, 0.5 * wt * pw, plus, minus));
                }
            }
            Ok(out)
        })?;
        let n_nodes = cells * per_cell;
        let mut node_t = Vec::with_capacity(n_nodes);
        let mut node_w = Vec::with_capacity(n_nodes);
        let mut plus = Vec::with_capacity(n_nodes);
        let mut minus = Vec::new();
        for (s, wt, p, m) in per.into_iter().flatten() {
            node_t.push(s);
            node_w.push(wt);
            plus.push(p);
            if let Some(m) = m {
                minus.push(m);
            }
        }
        let starts = cell_stencils(sys);
        let stencil = node_t.iter().map(|&s| lagrange(&w, &starts, s)).collect();

        let mut data = Data {
            dim: d,
            window: w,
            origin,
            offset: kl,
            cells,
            per_cell,
            identity,
            forward,
            backward,
            node_t,
            node_w,
            plus,
            minus,
            stencil,
            bounds: BoundEstimates::new((0.0, 0.0), (0.0, 0.0), Method::Quadrature, tail.clone()),
        };
        let c_nodes: Vec<f64> = data.node_t.iter().map(|&s| sys.lipschitz(s)).collect();
        let e_nodes: Vec<f64> = data.node_t.iter().map(|&s| (sys.eps)(s)).collect();
        let sums = norm_sums(&data, &c_nodes, &e_nodes, exec);
        let interior = w.interior_cols();
        let pick = |k: usize| {
            let v: Vec<f64> = sums
                .iter()
                .map(|p| if k == 0 { p.0 } else { p.1 })
                .collect();
            let (m, val) = crate::shadow::interior_sup(&v, 0..v.len());
            (val, w.time(interior.start + m))
        };
        let mut bounds = BoundEstimates::new(pick(0), pick(1), Method::Quadrature, tail);
        bounds.dichotomy = dichotomy;
        data.bounds = bounds;
        Ok(Self(Arc::new(data)))
    }

    pub fn bounds(&self) -> &BoundEstimates {
        &self.0.bounds
    }

    pub fn window(&self) -> &TimeWindow {
        &self.0.window
    }

    /// Integration range `[S_lo, S_hi]`.
    pub fn range(&self) -> (f64, f64) {
        let d = &self.0;
        (d.origin, d.origin + d.cells as f64 * d.window.step)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.0.node_t
    }

    pub fn weights(&self) -> &[f64] {
        &self.0.node_w
    }

    /// Cubic interpolation of grid samples at the nodes; zero outside the window.
    pub fn interpolate(&self, z: &Samples) -> Samples {
        let d = &self.0;
        let mut out = Samples::zeros(d.dim, d.node_t.len());
        for (k, st) in d.stencil.iter().enumerate() {
            if let Some((start, wts)) = st {
                let mut col = out.column_mut(k);
                for (m, wt) in wts.iter().enumerate() {
                    col.axpy(*wt, &z.column(start + m), 1.0);
                }
            }
        }
        out
    }

    /// `∫_{S_lo}^{S_hi} 𝒢(t, s) g(s) ds` at every window time, from node samples of `g`.
    pub fn green_apply(&self, g: &Samples, exec: Exec) -> Samples {
        let d = &self.0;
        let dim = d.dim;
        let cell_sums = |mats: &Vec<DMatrix<f64>>| {
            exec.map(d.cells, |j| {
                let mut u = nalgebra::DVector::zeros(dim);
                for k in j * d.per_cell..(j + 1) * d.per_cell {
                    u += &mats[k] * g.column(k) * d.node_w[k];
                }
                u
            })
        };
        let len = d.window.len();
        let mut out = Samples::zeros(dim, len);
        let up = cell_sums(&d.plus);
        let mut acc = nalgebra::DVector::zeros(dim);
        for j in 0..d.cells.min(d.offset + len - 1) {
            acc = &d.forward[j] * acc + &up[j];
            if j + 1 >= d.offset {
                out.column_mut(j + 1 - d.offset).copy_from(&acc);
            }
        }
        if !d.identity {
            let um = cell_sums(&d.minus);
            let mut acc = nalgebra::DVector::zeros(dim);
            for j in (d.offset..d.cells).rev() {
                acc = &d.backward[j] * acc + &um[j];
                if j < d.offset + len {
                    let mut col = out.column_mut(j - d.offset);
                    col -= &acc;
                }
            }
        }
        out
    }
}

/// `(∫ c‖𝒢(t,·)‖, ∫ ε‖𝒢(t,·)‖)` at the interior window times.
fn norm_sums(d: &Data, c: &[f64], e: &[f64], exec: Exec) -> Vec<(f64, f64)> {
    let interior: Range<usize> = d.window.interior_cols();
    let dim = d.dim;
    exec.map(interior.len(), |k| {
        let jm = d.offset + interior.start + k;
        let (mut qs, mut ls) = (0.0, 0.0);
        let mut m = DMatrix::<f64>::identity(dim, dim);
        for j in (0..jm).rev() {
            for n in j * d.per_cell..(j + 1) * d.per_cell {
                let g = op_norm(&(&m * &d.plus[n])) * d.node_w[n];
                qs += c[n] * g;
                ls += e[n] * g;
            }
            m = &m * &d.forward[j];
        }
        if !d.identity {
            let mut m = DMatrix::<f64>::identity(dim, dim);
            for j in jm..d.cells {
                for n in j * d.per_cell..(j + 1) * d.per_cell {
                    let g = op_norm(&(&m * &d.minus[n])) * d.node_w[n];
                    qs += c[n] * g;
                    ls += e[n] * g;
                }
                m = &m * &d.backward[j];
            }
        }
        (qs, ls)
    })
}

impl Green for ContinuousKernel {
    fn dim(&self) -> usize {
        self.0.dim
    }

    fn len(&self) -> usize {
        self.0.window.len()
    }

    fn interior(&self) -> Range<usize> {
        self.0.window.interior_cols()
    }

    fn lift(&self, z: &Samples) -> Samples {
        self.interpolate(z)
    }

    fn apply(&self, forcing: &Samples, exec: Exec) -> Samples {
        self.green_apply(forcing, exec)
    }
}
