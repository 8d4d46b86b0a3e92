//! Named example problems with analytic derivative oracles.
//!
//! | name          | equation                                                     |
//! |---------------|--------------------------------------------------------------|
//! | `cont-sin`    | `x' = −x + λ sin t`                                          |
//! | `cont-rho`    | `x' = −ρ'/ρ·x + λ e^{−a|t|} ρ(−|t|) x`, no exponential dichotomy |
//! | `disc-toy`    | `x_{n+1} = x_n/2 + λ/4·tanh x_n`                             |
//! | `disc-forced` | `x_{n+1} = diag(1/2, 2) x_n + λ (sin n, cos n/2)`            |

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::linear::{
    IndexWindow, LinearPartContinuous, LinearPartDiscrete, ProjectionFamily, TimeWindow,
};
use crate::{Error, Result, Samples};

use super::{
    ContinuousFamily, ContinuousOrbitJets, ContinuousSystem, DecayEnvelope, DiscreteFamily,
    DiscreteSystem, Nonlinearity, OrbitJets, PseudoOrbitDiscrete, PseudoSolutionContinuous,
};

pub type Params = BTreeMap<String, f64>;

pub struct DiscreteProblem {
    pub name: String,
    pub system: DiscreteSystem,
    pub orbit: PseudoOrbitDiscrete,
    /// Pseudo-orbits of the same construction at other parameter values.
    pub family: DiscreteFamily,
}

pub struct ContinuousProblem {
    pub name: String,
    pub system: ContinuousSystem,
    pub orbit: PseudoSolutionContinuous,
    pub family: ContinuousFamily,
}

pub enum GalleryProblem {
    Discrete(DiscreteProblem),
    Continuous(ContinuousProblem),
}

impl GalleryProblem {
    pub fn name(&self) -> &str {
        match self {
            Self::Discrete(p) => &p.name,
            Self::Continuous(p) => &p.name,
        }
    }
}

pub fn gallery_names() -> &'static [&'static str] {
    &["cont-sin", "cont-rho", "disc-toy", "disc-forced"]
}

/// Builds a gallery problem; unknown parameter keys are rejected.
pub fn gallery(name: &str, params: &Params) -> Result<GalleryProblem> {
    match name {
        "cont-sin" => cont_sin(params).map(GalleryProblem::Continuous),
        "cont-rho" => cont_rho(params).map(GalleryProblem::Continuous),
        "disc-toy" => disc_toy(params).map(GalleryProblem::Discrete),
        "disc-forced" => disc_forced(params).map(GalleryProblem::Discrete),
        other => Err(Error::UnknownGallery(other.to_string())),
    }
}

struct Reader<'a> {
    params: &'a Params,
    allowed: Vec<&'static str>,
}

impl<'a> Reader<'a> {
    fn new(params: &'a Params) -> Self {
        Self {
            params,
            allowed: Vec::new(),
        }
    }

    fn get(&mut self, key: &'static str, default: f64) -> Result<f64> {
        self.allowed.push(key);
        let v = self.params.get(key).copied().unwrap_or(default);
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{key} must be finite")));
        }
        Ok(v)
    }

    fn int(&mut self, key: &'static str, default: i64) -> Result<i64> {
        let v = self.get(key, default as f64)?;
        if v.fract() != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "{key} must be an integer, got {v}"
            )));
        }
        Ok(v as i64)
    }

    fn finish(self) -> Result<()> {
        match self
            .params
            .keys()
            .find(|k| !self.allowed.contains(&k.as_str()))
        {
            Some(k) => Err(Error::InvalidParameter(format!(
                "unknown parameter `{k}`; expected one of {:?}",
                self.allowed
            ))),
            None => Ok(()),
        }
    }
}

fn scalar(v: f64) -> DVector<f64> {
    DVector::from_element(1, v)
}

fn mat1(v: f64) -> DMatrix<f64> {
    DMatrix::from_element(1, 1, v)
}

fn time_window(r: &mut Reader) -> Result<TimeWindow> {
    let lo = r.get("lo", -20.0)?;
    let hi = r.get("hi", 20.0)?;
    let h = r.get("h", 0.05)?;
    let margin = r.get("margin", 5.0)?;
    TimeWindow::new(lo, hi, h, margin)
}

fn index_window(r: &mut Reader) -> Result<IndexWindow> {
    let lo = r.int("lo", 0)?;
    let hi = r.int("hi", 200)?;
    let margin = r.int("margin", 10)?;
    if margin < 0 {
        return Err(Error::InvalidParameter("margin must be ≥ 0".into()));
    }
    IndexWindow::new(lo, hi, margin as usize)
}

// cont-sin

struct SinForcing;

impl Nonlinearity<f64> for SinForcing {
    fn dim(&self) -> usize {
        1
    }
    fn param_dim(&self) -> usize {
        1
    }
    fn eval(&self, t: f64, _x: &DVector<f64>, l: &DVector<f64>) -> DVector<f64> {
        scalar(l[0] * t.sin())
    }
    fn dx(&self, _t: f64, _x: &DVector<f64>, _l: &DVector<f64>) -> DMatrix<f64> {
        mat1(0.0)
    }
    fn dlambda(&self, t: f64, _x: &DVector<f64>, _l: &DVector<f64>) -> DMatrix<f64> {
        mat1(t.sin())
    }
    fn dxx(
        &self,
        _: f64,
        _: &DVector<f64>,
        _: &DVector<f64>,
        _: &DVector<f64>,
        _: &DVector<f64>,
    ) -> DVector<f64> {
        scalar(0.0)
    }
    fn dxlambda(
        &self,
        _: f64,
        _: &DVector<f64>,
        _: &DVector<f64>,
        _: &DVector<f64>,
        _: &DVector<f64>,
    ) -> DVector<f64> {
        scalar(0.0)
    }
    fn dlambdalambda(
        &self,
        _: f64,
        _: &DVector<f64>,
        _: &DVector<f64>,
        _: &DVector<f64>,
        _: &DVector<f64>,
    ) -> DVector<f64> {
        scalar(0.0)
    }
    fn lipschitz(&self, _t: f64) -> f64 {
        0.0
    }
}

fn sin_orbit(lambda: f64, eps: f64) -> Result<PseudoSolutionContinuous> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "cont-sin needs 0 < lambda < 1, got {lambda}"
        )));
    }
    let y = Arc::new(move |t: f64| {
        scalar(lambda / 2.0 * (t.sin() - t.cos()) + lambda * eps / 2.0 * (t.sin() + t.cos()))
    });
    let yp = Arc::new(move |t: f64| {
        scalar(lambda / 2.0 * (t.cos() + t.sin()) + lambda * eps / 2.0 * (t.cos() - t.sin()))
    });
    let jets = ContinuousOrbitJets {
        dy: Arc::new(move |t: f64| {
            mat1(0.5 * (t.sin() - t.cos()) + eps / 2.0 * (t.sin() + t.cos()))
        }),
        dyp: Arc::new(move |t: f64| {
            mat1(0.5 * (t.cos() + t.sin()) + eps / 2.0 * (t.cos() - t.sin()))
        }),
        d2y: Arc::new(|_| mat1(0.0)),
        d2yp: Arc::new(|_| mat1(0.0)),
    };
    Ok(PseudoSolutionContinuous::new(scalar(lambda), 1, y, yp).with_jets(jets))
}

fn cont_sin(params: &Params) -> Result<ContinuousProblem> {
    let mut r = Reader::new(params);
    let lambda = r.get("lambda", 0.5)?;
    let eps = r.get("eps", 0.1)?;
    let window = time_window(&mut r)?;
    r.finish()?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be > 0, got {eps}"
        )));
    }
    let system = ContinuousSystem::new(
        LinearPartContinuous::constant(mat1(-1.0)),
        ProjectionFamily::Identity,
        Arc::new(SinForcing),
        Arc::new(move |_| eps),
        window,
        1.0,
    )?;
    Ok(ContinuousProblem {
        name: "cont-sin".into(),
        system,
        orbit: sin_orbit(lambda, eps)?,
        family: Arc::new(move |l: &DVector<f64>| sin_orbit(l[0], eps)),
    })
}

// cont-rho

/// `ρ(t) = 1 + t` for `t ≥ 0` and `1/(1 + |t|)` for `t < 0`.
pub(crate) fn rho(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 + t
    } else {
        1.0 / (1.0 - t)
    }
}

fn rho_prime(t: f64) -> f64 {
    if t >= 0.0 {
        1.0
    } else {
        1.0 / ((1.0 - t) * (1.0 - t))
    }
}

struct RhoLinear {
    a: f64,
}

impl RhoLinear {
    fn c(&self, t: f64) -> f64 {
        (-self.a * t.abs()).exp() * rho(-t.abs())
    }
}

impl Nonlinearity<f64> for RhoLinear {
    fn dim(&self) -> usize {
        1
    }
    fn param_dim(&self) -> usize {
        1
    }
    fn eval(&self, t: f64, x: &DVector<f64>, l: &DVector<f64>) -> DVector<f64> {
        scalar(l[0] * self.c(t) * x[0])
    }
    fn dx(&self, t: f64, _x: &DVector<f64>, l: &DVector<f64>) -> DMatrix<f64> {
        mat1(l[0] * self.c(t))
    }
    fn dlambda(&self, t: f64, x: &DVector<f64>, _l: &DVector<f64>) -> DMatrix<f64> {
        mat1(self.c(t) * x[0])
    }
    fn dxx(
        &self,
        _: f64,
        _: &DVector<f64>,
        _: &DVector<f64>,
        _: &DVector<f64>,
        _: &DVector<f64>,
    ) -> DVector<f64> {
        scalar(0.0)
    }
    fn dxlambda(
        &self,
        t: f64,
        _x: &DVector<f64>,
        _l: &DVector<f64>,
        u: &DVector<f64>,
        mu: &DVector<f64>,
    ) -> DVector<f64> {
        scalar(self.c(t) * u[0] * mu[0])
    }
    fn dlambdalambda(
        &self,
        _: f64,
        _: &DVector<f64>,
        _: &DVector<f64>,
        _: &DVector<f64>,
        _: &DVector<f64>,
    ) -> DVector<f64> {
        scalar(0.0)
    }
    fn lipschitz(&self, t: f64) -> f64 {
        self.c(t)
    }
}

fn rho_orbit(lambda: f64) -> Result<PseudoSolutionContinuous> {
    if !(lambda.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "cont-rho needs |lambda| < 1, got {lambda}"
        )));
    }
    let y = Arc::new(move |t: f64| scalar(lambda / (2.0 * rho(t))));
    // y' = A(t)·y(t), evaluated in the same order as the linear part so the defect is exact
    let yp = Arc::new(move |t: f64| scalar((-rho_prime(t) / rho(t)) * (lambda / (2.0 * rho(t)))));
    let jets = ContinuousOrbitJets {
        dy: Arc::new(|t: f64| mat1(1.0 / (2.0 * rho(t)))),
        dyp: Arc::new(|t: f64| mat1((-rho_prime(t) / rho(t)) * (1.0 / (2.0 * rho(t))))),
        d2y: Arc::new(|_| mat1(0.0)),
        d2yp: Arc::new(|_| mat1(0.0)),
    };
    Ok(PseudoSolutionContinuous::new(scalar(lambda), 1, y, yp).with_jets(jets))
}

fn cont_rho(params: &Params) -> Result<ContinuousProblem> {
    let mut r = Reader::new(params);
    let a = r.get("a", 3.0)?;
    let lambda = r.get("lambda", 0.5)?;
    let scale = r.get("eps_scale", 1.0)?;
    let window = time_window(&mut r)?;
    r.finish()?;
    if !(a > 2.0) {
        return Err(Error::InvalidParameter(format!(
            "cont-rho needs a > 2, got {a}"
        )));
    }
    if !(scale >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps_scale must be ≥ 1, got {scale}"
        )));
    }
    let lin = LinearPartContinuous::new(1, Arc::new(|t: f64| mat1(-rho_prime(t) / rho(t))));
    let mut system = ContinuousSystem::new(
        lin,
        ProjectionFamily::Identity,
        Arc::new(RhoLinear { a }),
        Arc::new(move |t: f64| scale * (-a * t.abs()).exp()),
        window,
        1.0,
    )?
    .with_decay(DecayEnvelope {
        rate: a,
        scale,
        kernel_bound: 1.0,
    });
    system.assume_no_bounded_solutions = true;
    Ok(ContinuousProblem {
        name: "cont-rho".into(),
        system,
        orbit: rho_orbit(lambda)?,
        family: Arc::new(|l: &DVector<f64>| rho_orbit(l[0])),
    })
}

// disc-toy

struct ToyTanh;

const TOY_SCALE: f64 = 0.25;

fn sech2(x: f64) -> f64 {
    let c = x.cosh();
    1.0 / (c * c)
}

impl Nonlinearity<i64> for ToyTanh {
    fn dim(&self) -> usize {
        1
    }
    fn param_dim(&self) -> usize {
        1
    }
    fn eval(&self, _n: i64, x: &DVector<f64>, l: &DVector<f64>) -> DVector<f64> {
        scalar(l[0] * TOY_SCALE * x[0].tanh())
    }
    fn dx(&self, _n: i64, x: &DVector<f64>, l: &DVector<f64>) -> DMatrix<f64> {
        mat1(l[0] * TOY_SCALE * sech2(x[0]))
    }
    fn dlambda(&self, _n: i64, x: &DVector<f64>, _l: &DVector<f64>) -> DMatrix<f64> {
        mat1(TOY_SCALE * x[0].tanh())
    }
    fn dxx(
        &self,
        _n: i64,
        x: &DVector<f64>,
        l: &DVector<f64>,
        u: &DVector<f64>,
        v: &DVector<f64>,
    ) -> DVector<f64> {
        scalar(-2.0 * l[0] * TOY_SCALE * sech2(x[0]) * x[0].tanh() * u[0] * v[0])
    }
    fn dxlambda(
        &self,
        _n: i64,
        x: &DVector<f64>,
        _l: &DVector<f64>,
        u: &DVector<f64>,
        mu: &DVector<f64>,
    ) -> DVector<f64> {
        scalar(TOY_SCALE * sech2(x[0]) * u[0] * mu[0])
    }
    fn dlambdalambda(
        &self,
        _: i64,
        _: &DVector<f64>,
        _: &DVector<f64>,
        _: &DVector<f64>,
        _: &DVector<f64>,
    ) -> DVector<f64> {
        scalar(0.0)
    }
    fn lipschitz(&self, _n: i64) -> f64 {
        TOY_SCALE
    }
}

/// `y_lo = 0`, `y_{n+1} = y_n/2 + λ/4·tanh y_n + ε cos n`, with its λ-derivatives.
fn toy_orbit(window: IndexWindow, lambda: f64, eps: f64) -> Result<PseudoOrbitDiscrete> {
    if !(lambda.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "disc-toy needs |lambda| ≤ 1, got {lambda}"
        )));
    }
    let len = window.len();
    let (mut y, mut d1, mut d2) = (vec![0.0f64; len], vec![0.0f64; len], vec![0.0f64; len]);
    for pos in 0..len - 1 {
        let n = window.index(pos);
        let (v, a, b) = (y[pos], d1[pos], d2[pos]);
        let (th, s2) = (v.tanh(), sech2(v));
        y[pos + 1] = 0.5 * v + TOY_SCALE * lambda * th + eps * (n as f64).cos();
        d1[pos + 1] = 0.5 * a + TOY_SCALE * th + TOY_SCALE * lambda * s2 * a;
        d2[pos + 1] = 0.5 * b
            + 2.0 * TOY_SCALE * s2 * a
            + TOY_SCALE * lambda * (-2.0 * s2 * th * a * a + s2 * b);
    }
    let jets = OrbitJets {
        first: d1.iter().map(|&v| mat1(v)).collect(),
        second: d2.iter().map(|&v| mat1(v)).collect(),
    };
    PseudoOrbitDiscrete::new(scalar(lambda), window, Samples::from_vec(1, len, y))?.with_jets(jets)
}

fn disc_toy(params: &Params) -> Result<DiscreteProblem> {
    let mut r = Reader::new(params);
    let lambda = r.get("lambda", 0.5)?;
    let eps = r.get("eps", 0.1)?;
    let window = index_window(&mut r)?;
    r.finish()?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be > 0, got {eps}"
        )));
    }
    let system = DiscreteSystem::new(
        LinearPartDiscrete::constant(window, mat1(0.5))?,
        ProjectionFamily::Identity,
        Arc::new(ToyTanh),
        Arc::new(move |_| eps),
        5.0,
    )?;
    Ok(DiscreteProblem {
        name: "disc-toy".into(),
        system,
        orbit: toy_orbit(window, lambda, eps)?,
        family: Arc::new(move |l: &DVector<f64>| toy_orbit(window, l[0], eps)),
    })
}

// disc-forced

struct Forcing;

fn forcing(n: i64) -> DVector<f64> {
    let n = n as f64;
    DVector::from_vec(vec![n.sin(), (0.5 * n).cos()])
}

impl Nonlinearity<i64> for Forcing {
    fn dim(&self) -> usize {
        2
    }
    fn param_dim(&self) -> usize {
        1
    }
    fn eval(&self, n: i64, _x: &DVector<f64>, l: &DVector<f64>) -> DVector<f64> {
        forcing(n) * l[0]
    }
    fn dx(&self, _n: i64, _x: &DVector<f64>, _l: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::zeros(2, 2)
    }
    fn dlambda(&self, n: i64, _x: &DVector<f64>, _l: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_column_slice(2, 1, forcing(n).as_slice())
    }
    fn dxx(
        &self,
        _: i64,
        _: &DVector<f64>,
        _: &DVector<f64>,
        _: &DVector<f64>,
        _: &DVector<f64>,
    ) -> DVector<f64> {
        DVector::zeros(2)
    }
    fn dxlambda(
        &self,
        _: i64,
        _: &DVector<f64>,
        _: &DVector<f64>,
        _: &DVector<f64>,
        _: &DVector<f64>,
    ) -> DVector<f64> {
        DVector::zeros(2)
    }
    fn dlambdalambda(
        &self,
        _: i64,
        _: &DVector<f64>,
        _: &DVector<f64>,
        _: &DVector<f64>,
        _: &DVector<f64>,
    ) -> DVector<f64> {
        DVector::zeros(2)
    }
    fn lipschitz(&self, _n: i64) -> f64 {
        0.0
    }
}

fn zero_orbit(window: IndexWindow, lambda: f64) -> Result<PseudoOrbitDiscrete> {
    if !(lambda.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "disc-forced needs |lambda| ≤ 1, got {lambda}"
        )));
    }
    let len = window.len();
    let jets = OrbitJets {
        first: vec![DMatrix::zeros(2, 1); len],
        second: vec![DMatrix::zeros(2, 1); len],
    };
    PseudoOrbitDiscrete::new(scalar(lambda), window, Samples::zeros(2, len))?.with_jets(jets)
}

fn disc_forced(params: &Params) -> Result<DiscreteProblem> {
    let mut r = Reader::new(params);
    let lambda = r.get("lambda", 0.5)?;
    let window = index_window(&mut r)?;
    r.finish()?;
    let lin = LinearPartDiscrete::constant(
        window,
        DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 2.0])),
    )?;
    let proj =
        ProjectionFamily::Constant(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0])));
    let system = DiscreteSystem::new(lin, proj, Arc::new(Forcing), Arc::new(|_| 1.0), 1.0)?;
    Ok(DiscreteProblem {
        name: "disc-forced".into(),
        system,
        orbit: zero_orbit(window, lambda)?,
        family: Arc::new(move |l: &DVector<f64>| zero_orbit(window, l[0])),
    })
}
