mod common;

use std::sync::Arc;

use common::*;
use rand::Rng;
use shadowkit::linear::{
    IndexWindow, LinearPartContinuous, LinearPartDiscrete, ProjectionFamily, TimeWindow,
};
use shadowkit::system::csv_io::{index_keys, read_discrete, write_table};
use shadowkit::system::*;
use shadowkit::{DMatrix, DVector, Error, Samples};

struct Zero(usize);

impl<T: Copy> Nonlinearity<T> for Zero {
    fn dim(&self) -> usize {
        self.0
    }
    fn param_dim(&self) -> usize {
        1
    }
    fn eval(&self, _: T, _: &DVector<f64>, _: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(self.0)
    }
    fn dx(&self, _: T, _: &DVector<f64>, _: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::zeros(self.0, self.0)
    }
    fn dlambda(&self, _: T, _: &DVector<f64>, _: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::zeros(self.0, 1)
    }
    fn dxx(
        &self,
        _: T,
        _: &DVector<f64>,
        _: &DVector<f64>,
        _: &DVector<f64>,
        _: &DVector<f64>,
    ) -> DVector<f64> {
        DVector::zeros(self.0)
    }
    fn dxlambda(
        &self,
        _: T,
        _: &DVector<f64>,
        _: &DVector<f64>,
        _: &DVector<f64>,
        _: &DVector<f64>,
    ) -> DVector<f64> {
        DVector::zeros(self.0)
    }
    fn dlambdalambda(
        &self,
        _: T,
        _: &DVector<f64>,
        _: &DVector<f64>,
        _: &DVector<f64>,
        _: &DVector<f64>,
    ) -> DVector<f64> {
        DVector::zeros(self.0)
    }
    fn lipschitz(&self, _: T) -> f64 {
        0.0
    }
}

fn half_system(lo: i64, hi: i64) -> DiscreteSystem {
    let w = IndexWindow::new(lo, hi, 0).unwrap();
    DiscreteSystem::new(
        LinearPartDiscrete::constant(w, DMatrix::from_element(1, 1, 0.5)).unwrap(),
        ProjectionFamily::Identity,
        Arc::new(Zero(1)),
        Arc::new(|_| 1.0),
        1.0,
    )
    .unwrap()
}

#[test]
fn exact_discrete_solution_has_no_defect() {
    let sys = half_system(0, 30);
    let y = PseudoOrbitDiscrete::new(
        scalar(0.0),
        *sys.window(),
        Samples::from_fn(1, 31, |_, k| 0.5f64.powi(k as i32)),
    )
    .unwrap();
    let r = defect_discrete(&sys, &y).unwrap();
    assert_eq!(r.sup_defect, 0.0);
    assert!(r.compliant);
    assert_eq!(r.defects.len(), 30);
}

#[test]
fn constant_orbit_defect_is_half() {
    let sys = half_system(0, 10);
    let y = PseudoOrbitDiscrete::new(
        scalar(0.0),
        *sys.window(),
        Samples::from_element(1, 11, 1.0),
    )
    .unwrap();
    let r = defect_discrete(&sys, &y).unwrap();
    assert!(r.defects.iter().all(|&d| d == 0.5));
    assert_eq!(r.sup_defect, 0.5);
}

#[test]
fn toy_defect_is_eps_cos() {
    let p = discrete("disc-toy", &[]);
    let r = defect_discrete(&p.system, &p.orbit).unwrap();
    assert!(r.compliant);
    let w = p.system.window();
    for (k, d) in r.defects.iter().enumerate() {
        let want = 0.1 * (w.index(k) as f64).cos().abs();
        assert!((d - want).abs() < 1e-15, "n = {}", w.index(k));
    }
    let max = r.defects.iter().cloned().fold(0.0, f64::max);
    assert_eq!(r.sup_defect, max);
}

#[test]
fn orbit_window_mismatch() {
    let sys = half_system(0, 10);
    let other = IndexWindow::new(0, 12, 0).unwrap();
    let y = PseudoOrbitDiscrete::new(scalar(0.0), other, Samples::zeros(1, 13)).unwrap();
    assert!(defect_discrete(&sys, &y).is_err());
}

#[test]
fn sin_defect_sup() {
    let p = continuous("cont-sin", &[("lambda", 0.5), ("eps", 0.1)]);
    let times = p.system.window.times();
    let r = defect_continuous(&p.system, &p.orbit, &times).unwrap();
    for (t, d) in times.iter().zip(&r.defects) {
        assert!((d - (0.05 * t.cos()).abs()).abs() < 1e-14);
    }
    assert!((r.sup_defect - 0.05).abs() < 1e-3);
    assert!(r.compliant);
}

#[test]
fn sin_exact_solution_has_no_defect() {
    let p = continuous("cont-sin", &[("lambda", 0.5)]);
    let l = 0.5;
    let x = PseudoSolutionContinuous::new(
        scalar(l),
        1,
        Arc::new(move |t: f64| scalar(l / 2.0 * (t.sin() - t.cos()))),
        Arc::new(move |t: f64| scalar(l / 2.0 * (t.cos() + t.sin()))),
    );
    let r = defect_continuous(&p.system, &x, &p.system.window.times()).unwrap();
    assert!(r.sup_defect < 1e-14);
}

#[test]
fn zero_solution_of_zero_system() {
    let w = TimeWindow::new(-5.0, 5.0, 0.1, 1.0).unwrap();
    let sys = ContinuousSystem::new(
        LinearPartContinuous::constant(DMatrix::from_element(1, 1, -1.0)),
        ProjectionFamily::Identity,
        Arc::new(Zero(1)),
        Arc::new(|_| 0.1),
        w,
        1.0,
    )
    .unwrap();
    let y = PseudoSolutionContinuous::new(
        scalar(0.0),
        1,
        Arc::new(|_| scalar(0.0)),
        Arc::new(|_| scalar(0.0)),
    );
    assert_eq!(
        defect_continuous(&sys, &y, &w.times()).unwrap().sup_defect,
        0.0
    );
}

#[test]
fn gallery_sin_orbit_formula() {
    let (l, e) = (0.5, 0.1);
    let p = continuous("cont-sin", &[("lambda", l), ("eps", e)]);
    for t in [-3.0f64, -0.4, 0.0, 1.1, 7.5] {
        let want = l / 2.0 * (t.sin() - t.cos()) + l * e / 2.0 * (t.sin() + t.cos());
        assert!((p.orbit.value(t)[0] - want).abs() < 1e-15);
    }
}

#[test]
fn gallery_rho_data() {
    let p = continuous("cont-rho", &[("a", 3.0)]);
    for t in [-4.0f64, -0.5, 0.0, 0.25, 3.0] {
        assert!((p.system.lipschitz(t) - (-3.0 * t.abs()).exp() * rho(-t.abs())).abs() < 1e-15);
        assert!((p.orbit.value(t)[0] - 0.5 / (2.0 * rho(t))).abs() < 1e-15);
    }
}

#[test]
fn gallery_errors() {
    assert!(matches!(
        gallery("nope", &Params::new()),
        Err(Error::UnknownGallery(_))
    ));
    assert!(matches!(
        gallery("cont-rho", &params(&[("a", 1.5)])),
        Err(Error::InvalidParameter(_))
    ));
    assert!(matches!(
        gallery("disc-toy", &params(&[("bogus", 1.0)])),
        Err(Error::InvalidParameter(_))
    ));
}

fn all_gallery() -> Vec<GalleryProblem> {
    gallery_names()
        .iter()
        .map(|n| gallery(n, &Params::new()).unwrap())
        .collect()
}

/// Central-difference errors of every partial at steps `h` and `h/2`; returns the worst ratio
/// among partials whose error is above rounding level.
fn richardson<T: Copy>(
    f: &dyn Nonlinearity<T>,
    t: T,
    x: &DVector<f64>,
    l: &DVector<f64>,
    rng: &mut impl Rng,
) -> Vec<f64> {
    let d = f.dim();
    let p = f.param_dim();
    let u = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
    let mu = DVector::from_fn(p, |_, _| rng.gen_range(-1.0..1.0));
    let mut ratios = Vec::new();
    let mut push = |e1: f64, e2: f64, scale: f64| {
        if e1 > 1e-9 * (1.0 + scale) {
            ratios.push(e1 / e2);
        }
    };
    let err = |h: f64| {
        let fx = (f.eval(t, &(x + &u * h), l) - f.eval(t, &(x - &u * h), l)) / (2.0 * h);
        let fl = (f.eval(t, x, &(l + &mu * h)) - f.eval(t, x, &(l - &mu * h))) / (2.0 * h);
        let dxx = (f.dx(t, &(x + &u * h), l) - f.dx(t, &(x - &u * h), l)) / (2.0 * h) * &u;
        let dxl = (f.dx(t, x, &(l + &mu * h)) - f.dx(t, x, &(l - &mu * h))) / (2.0 * h) * &u;
        let dll =
            (f.dlambda(t, x, &(l + &mu * h)) - f.dlambda(t, x, &(l - &mu * h))) / (2.0 * h) * &mu;
        [
            (fx - f.dx(t, x, l) * &u).amax(),
            (fl - f.dlambda(t, x, l) * &mu).amax(),
            (dxx - f.dxx(t, x, l, &u, &u)).amax(),
            (dxl - f.dxlambda(t, x, l, &u, &mu)).amax(),
            (dll - f.dlambdalambda(t, x, l, &mu, &mu)).amax(),
        ]
    };
    let (a, b) = (err(1e-3), err(5e-4));
    for k in 0..5 {
        push(a[k], b[k], 1.0);
    }
    ratios
}

#[test]
fn derivative_oracles_converge_at_second_order() {
    let mut r = rng(11);
    for g in all_gallery() {
        for _ in 0..20 {
            let ratios = match &g {
                GalleryProblem::Discrete(p) => {
                    let n = r.gen_range(p.system.window().lo..=p.system.window().hi);
                    let x = DVector::from_fn(p.system.dim(), |_, _| r.gen_range(-2.0..2.0));
                    richardson(&*p.system.f, n, &x, &p.orbit.lambda, &mut r)
                }
                GalleryProblem::Continuous(p) => {
                    let t = r.gen_range(-20.0..20.0);
                    let x = DVector::from_fn(p.system.dim(), |_, _| r.gen_range(-2.0..2.0));
                    richardson(&*p.system.f, t, &x, &p.orbit.lambda, &mut r)
                }
            };
            for q in ratios {
                assert!((3.5..=4.5).contains(&q), "{}: ratio {q}", g.name());
            }
        }
    }
}

#[test]
fn lipschitz_envelopes_hold() {
    let mut r = rng(12);
    for g in all_gallery() {
        for _ in 0..200 {
            let (lhs, rhs) = match &g {
                GalleryProblem::Discrete(p) => {
                    let n = r.gen_range(p.system.window().lo..=p.system.window().hi);
                    let d = p.system.dim();
                    let x = DVector::from_fn(d, |_, _| r.gen_range(-3.0..3.0));
                    let y = DVector::from_fn(d, |_, _| r.gen_range(-3.0..3.0));
                    let l = scalar(r.gen_range(-1.0..1.0));
                    (
                        (p.system.f.eval(n, &x, &l) - p.system.f.eval(n, &y, &l)).amax(),
                        p.system.lipschitz(n) * (x - y).amax(),
                    )
                }
                GalleryProblem::Continuous(p) => {
                    let t = r.gen_range(-20.0..20.0);
                    let x = scalar(r.gen_range(-3.0..3.0));
                    let y = scalar(r.gen_range(-3.0..3.0));
                    let l = scalar(r.gen_range(-0.99..0.99));
                    (
                        (p.system.f.eval(t, &x, &l) - p.system.f.eval(t, &y, &l)).amax(),
                        p.system.lipschitz(t) * (x - y).amax(),
                    )
                }
            };
            assert!(lhs <= rhs * (1.0 + 1e-12), "{}: {lhs} > {rhs}", g.name());
        }
    }
}

#[test]
fn second_partials_within_c_eps() {
    let mut r = rng(13);
    for g in all_gallery() {
        for _ in 0..100 {
            let (norm, bound) = match &g {
                GalleryProblem::Discrete(p) => {
                    let s = &p.system;
                    let n = r.gen_range(s.window().lo..=s.window().hi);
                    let d = s.dim();
                    let x = DVector::from_fn(d, |_, _| r.gen_range(-3.0..3.0));
                    let l = &p.orbit.lambda;
                    let u = DVector::from_fn(d, |_, _| if r.gen_bool(0.5) { 1.0 } else { -1.0 });
                    let m = scalar(if r.gen_bool(0.5) { 1.0 } else { -1.0 });
                    let v = [
                        s.f.dxx(n, &x, l, &u, &u).amax(),
                        s.f.dxlambda(n, &x, l, &u, &m).amax(),
                        s.f.dlambdalambda(n, &x, l, &m, &m).amax(),
                    ];
                    (
                        v.into_iter().fold(0.0, f64::max),
                        s.deriv_bound * (s.eps)(n),
                    )
                }
                GalleryProblem::Continuous(p) => {
                    let s = &p.system;
                    let t = r.gen_range(-20.0..20.0);
                    let x = scalar(p.orbit.value(t)[0] + r.gen_range(-0.5..0.5));
                    let l = &p.orbit.lambda;
                    let (u, m) = (scalar(1.0), scalar(1.0));
                    let v = [
                        s.f.dxx(t, &x, l, &u, &u).amax(),
                        s.f.dxlambda(t, &x, l, &u, &m).amax(),
                        s.f.dlambdalambda(t, &x, l, &m, &m).amax(),
                    ];
                    (
                        v.into_iter().fold(0.0, f64::max),
                        s.deriv_bound * (s.eps)(t),
                    )
                }
            };
            assert!(
                norm <= bound * (1.0 + 1e-12),
                "{}: {norm} > {bound}",
                g.name()
            );
        }
    }
}

#[test]
fn gallery_hypotheses_pass() {
    for g in all_gallery() {
        let rep = match &g {
            GalleryProblem::Discrete(p) => {
                check_discrete(&p.system, &p.orbit, Some(&p.family), 50, 7).unwrap()
            }
            GalleryProblem::Continuous(p) => {
                check_continuous(&p.system, &p.orbit, Some(&p.family), 50, 7).unwrap()
            }
        };
        assert!(rep.passed(), "{}: {:?}", g.name(), rep.failed());
        assert_eq!(rep.partials, Status::SampledVerified);
        assert!(rep.lipschitz_ratio <= 1.0 + 1e-12);
    }
}

#[test]
fn undersized_envelope_fails_pseudo_orbit_check() {
    let p = discrete("disc-toy", &[("eps", 0.1)]);
    let tight = discrete("disc-toy", &[("eps", 0.05)]);
    let rep = check_discrete(&tight.system, &p.orbit, None, 20, 1).unwrap();
    assert_eq!(rep.pseudo_orbit, Status::Failed);
    assert!(!rep.passed());
}

#[test]
fn discrete_csv_round_trip_is_bit_exact() {
    let p = discrete("disc-toy", &[]);
    let w = p.system.window();
    let mut buf = Vec::new();
    write_table(
        &mut buf,
        "n",
        &index_keys(w.lo, w.len()),
        &[("y", &p.orbit.values)],
    )
    .unwrap();
    let (idx, vals) = read_discrete(&buf[..]).unwrap();
    assert_eq!(idx, w.indices().collect::<Vec<_>>());
    assert_eq!(vals, p.orbit.values);
}
