//! Sampled verification of the standing hypotheses: Lipschitz envelope, derivative oracles,
//! second-derivative envelope `C ε`, pseudo-orbit defects and their λ-derivatives.
//! Every outcome is "sampled-verified" at best.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::linalg::vec_norm;
use crate::Result;

use super::{
    defect_continuous, defect_discrete, ContinuousFamily, ContinuousSystem, DiscreteFamily,
    DiscreteSystem, Nonlinearity, PseudoOrbitDiscrete, PseudoSolutionContinuous,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    SampledVerified,
    Assumed,
    Unverified,
    Failed,
    NotApplicable,
}

impl Status {
    fn from_pass(ok: bool) -> Self {
        if ok {
            Self::SampledVerified
        } else {
            Self::Failed
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub lipschitz: Status,
    pub partials: Status,
    pub second_partials_bound: Status,
    pub pseudo_orbit: Status,
    pub pseudo_derivatives: Status,
    pub orbit_derivatives: Status,
    pub no_bounded_solutions: Status,
    /// Largest sampled `‖f(x) − f(x')‖ / (c‖x − x'‖)`.
    pub lipschitz_ratio: f64,
    /// Largest sampled `‖∂²f‖ / ε`, the empirical `C`.
    pub sampled_c: f64,
    pub samples: usize,
}

impl HypothesisReport {
    pub fn failed(&self) -> Vec<&'static str> {
        [
            ("lipschitz", self.lipschitz),
            ("partials", self.partials),
            ("second-partials-bound", self.second_partials_bound),
            ("pseudo-orbit", self.pseudo_orbit),
            ("pseudo-derivatives", self.pseudo_derivatives),
            ("orbit-derivatives", self.orbit_derivatives),
            ("no-bounded-solutions", self.no_bounded_solutions),
        ]
        .into_iter()
        .filter(|(_, s)| *s == Status::Failed)
        .map(|(n, _)| n)
        .collect()
    }

    pub fn passed(&self) -> bool {
        self.failed().is_empty()
    }
}

const FD_STEP: f64 = 1e-5;
const FD_REL: f64 = 1e-5;

fn close(ana: &DVector<f64>, fd: &DVector<f64>, rel: f64) -> bool {
    vec_norm(&(ana - fd)) <= rel * vec_norm(ana).max(1.0)
}

fn unit(n: usize, i: usize) -> DVector<f64> {
    let mut e = DVector::zeros(n);
    e[i] = 1.0;
    e
}

/// `max ‖B(u, v)‖∞` over sign vectors `u, v`; exact for `d, p ≤ 4`, sampled otherwise.
fn bilinear_norm(
    nu: usize,
    nv: usize,
    rng: &mut ChaCha8Rng,
    b: impl Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64>,
) -> f64 {
    let sign = |bits: u32, n: usize| {
        DVector::from_fn(n, |i, _| if bits >> i & 1 == 1 { -1.0 } else { 1.0 })
    };
    let exhaustive = nu <= 4 && nv <= 4;
    let (cu, cv) = if exhaustive {
        (1u32 << nu, 1u32 << nv)
    } else {
        (8, 8)
    };
    let mut best: f64 = 0.0;
    for iu in 0..cu {
        let u = if exhaustive {
            sign(iu, nu)
        } else {
            sign(rng.gen(), nu)
        };
        for iv in 0..cv {
            let v = if exhaustive {
                sign(iv, nv)
            } else {
                sign(rng.gen(), nv)
            };
            best = best.max(vec_norm(&b(&u, &v)));
        }
    }
    best
}

struct Sampled {
    lip_ok: bool,
    lip_ratio: f64,
    partials_ok: bool,
    second_ok: bool,
    sampled_c: f64,
}

/// Spot checks of `f` at the supplied `(t, x, λ)` points.
fn sample_nonlinearity<T: Copy>(
    f: &dyn Nonlinearity<T>,
    points: &[(T, DVector<f64>, DVector<f64>)],
    lambda: &DVector<f64>,
    eps: impl Fn(T) -> f64,
    c_bound: f64,
    rng: &mut ChaCha8Rng,
) -> Sampled {
    let (d, p) = (f.dim(), f.param_dim());
    let mut out = Sampled {
        lip_ok: true,
        lip_ratio: 0.0,
        partials_ok: true,
        second_ok: true,
        sampled_c: 0.0,
    };
    for (t, x, x2) in points {
        let t = *t;
        let c = f.lipschitz(t);
        let df = vec_norm(&(f.eval(t, x, lambda) - f.eval(t, x2, lambda)));
        let dx = vec_norm(&(x - x2));
        if df > c * dx * (1.0 + 1e-12) + 1e-15 {
            out.lip_ok = false;
        }
        if c * dx > 0.0 {
            out.lip_ratio = out.lip_ratio.max(df / (c * dx));
        }

        let h = FD_STEP * vec_norm(x).max(1.0);
        let jx = f.dx(t, x, lambda);
        let jl = f.dlambda(t, x, lambda);
        for i in 0..d {
            let e = unit(d, i) * h;
            let fd = (f.eval(t, &(x + &e), lambda) - f.eval(t, &(x - &e), lambda)) / (2.0 * h);
            out.partials_ok &= close(&jx.column(i).into_owned(), &fd, FD_REL);
            for j in 0..d {
                let v = unit(d, j);
                let ana = f.dxx(t, x, lambda, &unit(d, i), &v);
                let fd = (f.dx(t, &(x + &e), lambda) - f.dx(t, &(x - &e), lambda)) * &v / (2.0 * h);
                out.partials_ok &= close(&ana, &fd, FD_REL);
            }
        }
        let hl = FD_STEP * vec_norm(lambda).max(1.0);
        for k in 0..p {
            let e = unit(p, k) * hl;
            let (lp, lm) = (lambda + &e, lambda - &e);
            let fd = (f.eval(t, x, &lp) - f.eval(t, x, &lm)) / (2.0 * hl);
            out.partials_ok &= close(&jl.column(k).into_owned(), &fd, FD_REL);
            for i in 0..d {
                let u = unit(d, i);
                let ana = f.dxlambda(t, x, lambda, &u, &unit(p, k));
                let fd = (f.dx(t, x, &lp) - f.dx(t, x, &lm)) * &u / (2.0 * hl);
                out.partials_ok &= close(&ana, &fd, FD_REL);
            }
            for l in 0..p {
                let nu = unit(p, l);
                let ana = f.dlambdalambda(t, x, lambda, &unit(p, k), &nu);
                let fd = (f.dlambda(t, x, &lp) - f.dlambda(t, x, &lm)) * &nu / (2.0 * hl);
                out.partials_ok &= close(&ana, &fd, FD_REL);
            }
        }

        let e = eps(t);
        let second = bilinear_norm(d, d, rng, |u, v| f.dxx(t, x, lambda, u, v))
            .max(bilinear_norm(d, p, rng, |u, m| {
                f.dxlambda(t, x, lambda, u, m)
            }))
            .max(bilinear_norm(p, p, rng, |m, n| {
                f.dlambdalambda(t, x, lambda, m, n)
            }));
        out.sampled_c = out.sampled_c.max(second / e);
        if second > c_bound * e * (1.0 + 1e-12) {
            out.second_ok = false;
        }
    }
    out
}

fn jitter(rng: &mut ChaCha8Rng, base: &DVector<f64>) -> DVector<f64> {
    base + DVector::from_fn(base.len(), |_, _| rng.gen_range(-1.0..1.0))
}

/// Residuals of the λ-differentiated orbit equation in direction `e_k`, orders 1 and 2.
fn pseudo_derivative_residuals_discrete(
    sys: &DiscreteSystem,
    y: &PseudoOrbitDiscrete,
) -> Result<Option<bool>> {
    let Some(jets) = &y.jets else { return Ok(None) };
    let (w, f, l) = (*sys.window(), &sys.f, &y.lambda);
    let p = l.len();
    let mut ok = true;
    for k in 0..p {
        let mu = unit(p, k);
        for pos in 0..w.len() - 1 {
            let n = w.index(pos);
            let a = sys.lin.matrix(n)?;
            let yn = y.at(pos);
            let d1 = jets.first_dir(pos, &mu);
            let d2 = jets.second_dir(pos, &mu);
            let fx = f.dx(n, &yn, l);
            let r1 =
                jets.first_dir(pos + 1, &mu) - a * &d1 - f.dlambda(n, &yn, l) * &mu - &fx * &d1;
            let r2 = jets.second_dir(pos + 1, &mu)
                - a * &d2
                - f.dlambdalambda(n, &yn, l, &mu, &mu)
                - f.dxlambda(n, &yn, l, &d1, &mu) * 2.0
                - f.dxx(n, &yn, l, &d1, &d1)
                - &fx * &d2;
            let bound = sys.deriv_bound * (sys.eps)(n) * (1.0 + 1e-12) + 1e-14;
            ok &= vec_norm(&r1) <= bound && vec_norm(&r2) <= bound;
        }
    }
    Ok(Some(ok))
}

fn orbit_jets_vs_family_discrete(
    y: &PseudoOrbitDiscrete,
    family: &DiscreteFamily,
) -> Result<Option<bool>> {
    let Some(jets) = &y.jets else { return Ok(None) };
    let p = y.lambda.len();
    let mut ok = true;
    for k in 0..p {
        let mu = unit(p, k);
        let h1 = 1e-4;
        let (a, b) = (
            family(&(&y.lambda + &mu * h1))?,
            family(&(&y.lambda - &mu * h1))?,
        );
        let h2 = 1e-3;
        let (c, e) = (
            family(&(&y.lambda + &mu * h2))?,
            family(&(&y.lambda - &mu * h2))?,
        );
        for pos in 0..y.window.len() {
            let fd1 = (a.at(pos) - b.at(pos)) / (2.0 * h1);
            let fd2 = (c.at(pos) - y.at(pos) * 2.0 + e.at(pos)) / (h2 * h2);
            ok &= close(&jets.first_dir(pos, &mu), &fd1, 1e-4)
                && close(&jets.second_dir(pos, &mu), &fd2, 1e-4);
        }
    }
    Ok(Some(ok))
}

fn opt_status(v: Option<bool>) -> Status {
    v.map_or(Status::NotApplicable, Status::from_pass)
}

fn bounded_status(assumed: bool) -> Status {
    if assumed {
        Status::Assumed
    } else {
        Status::Unverified
    }
}

/// Samples every checkable hypothesis of a discrete problem. `no_bounded_solutions` is
/// `assumed` when the system says so and `unverified` otherwise; a dichotomy certificate
/// upgrades it (done by the caller).
pub fn check_discrete(
    sys: &DiscreteSystem,
    y: &PseudoOrbitDiscrete,
    family: Option<&DiscreteFamily>,
    samples: usize,
    seed: u64,
) -> Result<HypothesisReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = *sys.window();
    let points: Vec<(i64, DVector<f64>, DVector<f64>)> = (0..samples)
        .map(|_| {
            let pos = rng.gen_range(0..w.len());
            let x = jitter(&mut rng, &y.at(pos));
            let x2 = jitter(&mut rng, &x);
            (w.index(pos), x, x2)
        })
        .collect();
    let s = sample_nonlinearity(
        sys.f.as_ref(),
        &points,
        &y.lambda,
        |n| (sys.eps)(n),
        sys.deriv_bound,
        &mut rng,
    );
    let defect = defect_discrete(sys, y)?;
    let orbit = match family {
        Some(fam) => orbit_jets_vs_family_discrete(y, fam)?,
        None => None,
    };
    Ok(HypothesisReport {
        lipschitz: Status::from_pass(s.lip_ok),
        partials: Status::from_pass(s.partials_ok),
        second_partials_bound: Status::from_pass(s.second_ok),
        pseudo_orbit: Status::from_pass(defect.compliant),
        pseudo_derivatives: opt_status(pseudo_derivative_residuals_discrete(sys, y)?),
        orbit_derivatives: opt_status(orbit),
        no_bounded_solutions: bounded_status(sys.assume_no_bounded_solutions),
        lipschitz_ratio: s.lip_ratio,
        sampled_c: s.sampled_c,
        samples,
    })
}

fn pseudo_derivative_residuals_continuous(
    sys: &ContinuousSystem,
    y: &PseudoSolutionContinuous,
    times: &[f64],
) -> Option<bool> {
    let jets = y.jets.as_ref()?;
    let (f, l) = (&sys.f, &y.lambda);
    let p = l.len();
    let mut ok = true;
    for k in 0..p {
        let mu = unit(p, k);
        for &t in times {
            let a: DMatrix<f64> = sys.lin.matrix(t);
            let yt = y.value(t);
            let (d1, d1p) = jets.first_dir(t, &mu);
            let (d2, d2p) = jets.second_dir(t, &mu);
            let fx = f.dx(t, &yt, l);
            let r1 = d1p - &a * &d1 - f.dlambda(t, &yt, l) * &mu - &fx * &d1;
            let r2 = d2p
                - &a * &d2
                - f.dlambdalambda(t, &yt, l, &mu, &mu)
                - f.dxlambda(t, &yt, l, &d1, &mu) * 2.0
                - f.dxx(t, &yt, l, &d1, &d1)
                - &fx * &d2;
            let bound = sys.deriv_bound * (sys.eps)(t) * (1.0 + 1e-12) + 1e-14;
            ok &= vec_norm(&r1) <= bound && vec_norm(&r2) <= bound;
        }
    }
    Some(ok)
}

fn orbit_jets_vs_family_continuous(
    y: &PseudoSolutionContinuous,
    family: &ContinuousFamily,
    times: &[f64],
) -> Result<Option<bool>> {
    let Some(jets) = &y.jets else { return Ok(None) };
    let p = y.lambda.len();
    let mut ok = true;
    for k in 0..p {
        let mu = unit(p, k);
        let (h1, h2) = (1e-4, 1e-3);
        let (a, b) = (
            family(&(&y.lambda + &mu * h1))?,
            family(&(&y.lambda - &mu * h1))?,
        );
        let (c, e) = (
            family(&(&y.lambda + &mu * h2))?,
            family(&(&y.lambda - &mu * h2))?,
        );
        for &t in times {
            let fd1 = (a.value(t) - b.value(t)) / (2.0 * h1);
            let fd1p = (a.deriv(t) - b.deriv(t)) / (2.0 * h1);
            let fd2 = (c.value(t) - y.value(t) * 2.0 + e.value(t)) / (h2 * h2);
            let fd2p = (c.deriv(t) - y.deriv(t) * 2.0 + e.deriv(t)) / (h2 * h2);
            let (d1, d1p) = jets.first_dir(t, &mu);
            let (d2, d2p) = jets.second_dir(t, &mu);
            ok &= close(&d1, &fd1, 1e-4)
                && close(&d1p, &fd1p, 1e-4)
                && close(&d2, &fd2, 1e-4)
                && close(&d2p, &fd2p, 1e-4);
        }
    }
    Ok(Some(ok))
}

/// Continuous counterpart of [`check_discrete`]; also spot-checks `y'` against central
/// differences of `y` (relative `1e−5`).
pub fn check_continuous(
    sys: &ContinuousSystem,
    y: &PseudoSolutionContinuous,
    family: Option<&ContinuousFamily>,
    samples: usize,
    seed: u64,
) -> Result<HypothesisReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = sys.window;
    let times: Vec<f64> = (0..samples).map(|_| rng.gen_range(w.lo..=w.hi)).collect();
    let points: Vec<(f64, DVector<f64>, DVector<f64>)> = times
        .iter()
        .map(|&t| {
            let x = jitter(&mut rng, &y.value(t));
            let x2 = jitter(&mut rng, &x);
            (t, x, x2)
        })
        .collect();
    let s = sample_nonlinearity(
        sys.f.as_ref(),
        &points,
        &y.lambda,
        |t| (sys.eps)(t),
        sys.deriv_bound,
        &mut rng,
    );
    let grid = w.times();
    let defect = defect_continuous(sys, y, &grid)?;
    let yp_ok = times.iter().all(|&t| {
        let h = 1e-5 * t.abs().max(1.0);
        let fd = (y.value(t + h) - y.value(t - h)) / (2.0 * h);
        close(&y.deriv(t), &fd, 1e-5)
    });
    let orbit = match family {
        Some(fam) => orbit_jets_vs_family_continuous(y, fam, &times)?,
        None => None,
    };
    let orbit_status = match orbit {
        Some(ok) => Status::from_pass(ok && yp_ok),
        None => Status::from_pass(yp_ok),
    };
    Ok(HypothesisReport {
        lipschitz: Status::from_pass(s.lip_ok),
        partials: Status::from_pass(s.partials_ok),
        second_partials_bound: Status::from_pass(s.second_ok),
        pseudo_orbit: Status::from_pass(defect.compliant),
        pseudo_derivatives: opt_status(pseudo_derivative_residuals_continuous(sys, y, &grid)),
        orbit_derivatives: orbit_status,
        no_bounded_solutions: bounded_status(sys.assume_no_bounded_solutions),
        lipschitz_ratio: s.lip_ratio,
        sampled_c: s.sampled_c,
        samples,
    })
}
