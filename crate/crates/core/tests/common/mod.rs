#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shadowkit::linear::{IndexWindow, LinearPartDiscrete};
use shadowkit::system::{gallery, ContinuousProblem, DiscreteProblem, GalleryProblem, Params};
use shadowkit::{DMatrix, DVector, Samples};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn params(kv: &[(&str, f64)]) -> Params {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

pub fn discrete(name: &str, kv: &[(&str, f64)]) -> DiscreteProblem {
    match gallery(name, &params(kv)).unwrap() {
        GalleryProblem::Discrete(p) => p,
        _ => panic!("{name} is continuous"),
    }
}

pub fn continuous(name: &str, kv: &[(&str, f64)]) -> ContinuousProblem {
    match gallery(name, &params(kv)).unwrap() {
        GalleryProblem::Continuous(p) => p,
        _ => panic!("{name} is discrete"),
    }
}

/// `d × d` matrix `s·(Id + E)` with `|E_ij| ≤ 0.3/d`, so `‖E‖∞ ≤ 0.3`.
pub fn moderate_matrix(rng: &mut impl Rng, d: usize) -> DMatrix<f64> {
    let s = rng.gen_range(0.6..1.6);
    let e = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-0.3..0.3) / d as f64);
    (DMatrix::identity(d, d) + e) * s
}

pub fn random_linear(rng: &mut impl Rng, d: usize, window: IndexWindow) -> LinearPartDiscrete {
    let mats: Vec<DMatrix<f64>> = (0..window.len()).map(|_| moderate_matrix(rng, d)).collect();
    let lo = window.lo;
    let mats = Arc::new(mats);
    LinearPartDiscrete::new(window, move |n: i64| mats[(n - lo) as usize].clone()).unwrap()
}

pub fn random_samples(rng: &mut impl Rng, d: usize, len: usize, radius: f64) -> Samples {
    Samples::from_fn(d, len, |_, _| rng.gen_range(-radius..radius))
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

pub fn scalar(v: f64) -> DVector<f64> {
    DVector::from_element(1, v)
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

pub fn rho(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 + t
    } else {
        1.0 / (1.0 - t)
    }
}

/// `c(t) = e^{−a|t|}/(1 + |t|)` of the ρ-family.
pub fn rho_c(a: f64, t: f64) -> f64 {
    (-a * t.abs()).exp() / (1.0 + t.abs())
}

/// `E(t) = ∫_{−∞}^t c`, split at the kink so each piece is smooth.
pub fn rho_mass(a: f64, t: f64) -> f64 {
    let c = |s: f64| rho_c(a, s);
    let far = -40.0;
    if t <= 0.0 {
        simpson(&c, far, t, 1e-15)
    } else {
        simpson(&c, far, 0.0, 1e-15) + simpson(&c, 0.0, t, 1e-15)
    }
}

/// Bounded correction of the ρ-family: the only solution `x = y + z` with `z` bounded is
/// `x = λ e^{λE}/(2ρ)`, so `z = λ(e^{λE} − 1)/(2ρ)`.
pub fn rho_correction(a: f64, lambda: f64, t: f64) -> f64 {
    lambda / (2.0 * rho(t)) * ((lambda * rho_mass(a, t)).exp() - 1.0)
}

/// `∂z/∂λ` of [`rho_correction`].
pub fn rho_correction_dlambda(a: f64, lambda: f64, t: f64) -> f64 {
    let e = rho_mass(a, t);
    let ex = (lambda * e).exp();
    (ex + lambda * e * ex - 1.0) / (2.0 * rho(t))
}
