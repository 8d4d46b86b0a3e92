mod common;

use std::sync::Arc;

use common::*;
use proptest::prelude::*;
use shadowkit::linear::*;
use shadowkit::{DMatrix, DVector, Error, Exec};

fn diag(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_vec(v.to_vec()))
}

fn saddle(lo: i64, hi: i64) -> (LinearPartDiscrete, ProjectionFamily<i64>) {
    let w = IndexWindow::new(lo, hi, 0).unwrap();
    (
        LinearPartDiscrete::constant(w, diag(&[0.5, 2.0])).unwrap(),
        ProjectionFamily::Constant(diag(&[1.0, 0.0])),
    )
}

#[test]
fn cocycle_of_constant_half() {
    let w = IndexWindow::new(0, 10, 0).unwrap();
    let lin = LinearPartDiscrete::constant(w, diag(&[0.5])).unwrap();
    assert!((cocycle(&lin, 7, 4).unwrap()[(0, 0)] - 0.125).abs() < 1e-15);
    assert_eq!(cocycle(&lin, 5, 5).unwrap(), DMatrix::identity(1, 1));
    assert!((cocycle(&lin, 4, 7).unwrap()[(0, 0)] - 8.0).abs() < 1e-12);
}

#[test]
fn cocycle_outside_window_errors() {
    let w = IndexWindow::new(0, 10, 0).unwrap();
    let lin = LinearPartDiscrete::constant(w, diag(&[0.5])).unwrap();
    assert!(matches!(
        cocycle(&lin, 11, 0),
        Err(Error::WindowBounds { index: 11, .. })
    ));
}

#[test]
fn singular_matrix_rejected() {
    let w = IndexWindow::new(0, 3, 0).unwrap();
    let r = LinearPartDiscrete::new(w, |n| if n == 2 { diag(&[0.0]) } else { diag(&[1.0]) });
    assert!(matches!(r, Err(Error::NotInvertible { index: 2, .. })));
}

#[test]
fn green_identity_projection_kills_backward_branch() {
    let w = IndexWindow::new(0, 20, 0).unwrap();
    let lin = LinearPartDiscrete::constant(w, diag(&[0.5])).unwrap();
    let p = ProjectionFamily::Identity;
    for (m, n) in [(5, 5), (9, 3), (20, 0)] {
        let g = green_discrete(&lin, &p, m, n).unwrap()[(0, 0)];
        assert!((g - 0.5f64.powi((m - n) as i32)).abs() < 1e-15);
    }
    assert_eq!(green_discrete(&lin, &p, 2, 8).unwrap()[(0, 0)], 0.0);
}

#[test]
fn green_saddle_branches() {
    let (lin, p) = saddle(-10, 10);
    for m in -10..=10i64 {
        for n in -10..=10i64 {
            let g = green_discrete(&lin, &p, m, n).unwrap();
            let want = if m >= n {
                diag(&[0.5f64.powi((m - n) as i32), 0.0])
            } else {
                diag(&[0.0, -(2.0f64.powi((m - n) as i32))])
            };
            assert!(max_abs(&(g - want)) < 1e-12, "({m}, {n})");
        }
    }
}

#[test]
fn unit_jump_at_diagonal() {
    let (lin, p) = saddle(0, 30);
    for n in 0..30 {
        let a = lin.matrix(n).unwrap();
        let jump = green_discrete(&lin, &p, n + 1, n + 1).unwrap()
            - a * green_discrete(&lin, &p, n, n + 1).unwrap();
        assert!(max_abs(&(jump - DMatrix::identity(2, 2))) < 1e-12);
    }
}

#[test]
fn kernel_table_matches_direct_blocks() {
    let mut r = rng(3);
    let w = IndexWindow::new(-6, 6, 0).unwrap();
    let lin = random_linear(&mut r, 3, w);
    let p = ProjectionFamily::Constant(diag(&[1.0, 1.0, 0.0]));
    let k = DiscreteKernel::build(&lin, &p, Exec::Sequential).unwrap();
    for m in 0..w.len() {
        for n in 0..w.len() {
            let direct = green_discrete(&lin, &p, w.index(m), w.index(n)).unwrap();
            assert!(max_abs(&(k.block(m, n) - direct)) < 1e-12);
        }
    }
}

#[test]
fn evolution_scalar_decay() {
    let lin = LinearPartContinuous::constant(diag(&[-1.0]));
    let evo = EvolutionFamily::covering(lin, -5.0, 5.0, 0.05);
    let t = evo.evolution(1.3, 0.3).unwrap()[(0, 0)];
    assert!((t - (-1.0f64).exp()).abs() < 1e-9);
    assert_eq!(evo.evolution(0.7, 0.7).unwrap(), DMatrix::identity(1, 1));
}

#[test]
fn evolution_of_the_rho_family() {
    let lin = LinearPartContinuous::new(
        1,
        Arc::new(|t: f64| {
            let rp = if t >= 0.0 {
                1.0
            } else {
                1.0 / ((1.0 - t) * (1.0 - t))
            };
            diag(&[-rp / rho(t)])
        }),
    );
    let evo = EvolutionFamily::covering(lin, -10.0, 10.0, 0.05);
    for (t, s) in [
        (3.0, -2.0),
        (-1.5, -7.25),
        (0.0, 4.0),
        (6.1, 0.3),
        (-4.0, 2.0),
    ] {
        let got = evo.evolution(t, s).unwrap()[(0, 0)];
        let want = rho(s) / rho(t);
        assert!(
            (got - want).abs() <= 1e-8 * want.max(1.0),
            "T({t}, {s}) = {got}, want {want}"
        );
    }
}

#[test]
fn rho_kernel_is_bounded_by_one() {
    let lin = LinearPartContinuous::new(
        1,
        Arc::new(|t: f64| {
            let rp = if t >= 0.0 {
                1.0
            } else {
                1.0 / ((1.0 - t) * (1.0 - t))
            };
            diag(&[-rp / rho(t)])
        }),
    );
    let evo = EvolutionFamily::covering(lin, -10.0, 10.0, 0.1);
    let p = ProjectionFamily::Identity;
    let grid: Vec<f64> = (0..50).map(|k| -10.0 + 20.0 * k as f64 / 49.0).collect();
    for &t in &grid {
        for &s in &grid {
            let g = green_continuous(&evo, &p, t, s).unwrap()[(0, 0)].abs();
            assert!(g <= 1.0 + 1e-9, "‖𝒢({t}, {s})‖ = {g}");
        }
    }
}

#[test]
fn continuous_green_scalar() {
    let evo = EvolutionFamily::covering(
        LinearPartContinuous::constant(diag(&[-1.0])),
        -5.0,
        5.0,
        0.1,
    );
    let p = ProjectionFamily::Identity;
    assert!((green_continuous(&evo, &p, 2.0, 0.5).unwrap()[(0, 0)] - (-1.5f64).exp()).abs() < 1e-9);
    assert_eq!(green_continuous(&evo, &p, 0.5, 2.0).unwrap()[(0, 0)], 0.0);
    assert_eq!(green_continuous(&evo, &p, 1.0, 1.0).unwrap()[(0, 0)], 1.0);
}

#[test]
fn evolution_composition() {
    let lin = LinearPartContinuous::new(
        2,
        Arc::new(|t: f64| DMatrix::from_row_slice(2, 2, &[-1.0, t.sin(), 0.3 * t.cos(), -2.0])),
    );
    let tol = lin.tol();
    let evo = EvolutionFamily::covering(lin, -4.0, 4.0, 0.1);
    for (t, s, r) in [(3.0, 1.0, -2.0), (-1.0, 2.5, 0.37), (0.05, -3.3, 1.7)] {
        let lhs = evo.evolution(t, s).unwrap() * evo.evolution(s, r).unwrap();
        let rhs = evo.evolution(t, r).unwrap();
        let scale = 1.0 + max_abs(&rhs);
        assert!(max_abs(&(lhs - rhs)) <= 10.0 * tol * scale);
    }
}

#[test]
fn dichotomy_of_scalar_decay() {
    let evo = EvolutionFamily::covering(
        LinearPartContinuous::constant(diag(&[-1.0])),
        -10.0,
        10.0,
        0.1,
    );
    let c = certify_dichotomy_continuous(
        &evo,
        &ProjectionFamily::Identity,
        -10.0,
        10.0,
        0.5,
        Exec::Parallel,
    )
    .unwrap();
    assert!(
        (c.d - 1.0).abs() < 0.02 && (c.rho - 1.0).abs() < 0.02,
        "{c:?}"
    );
}

#[test]
fn dichotomy_of_discrete_saddle() {
    let (lin, p) = saddle(-20, 20);
    let c = certify_dichotomy_discrete(&lin, &p, 1, Exec::Parallel).unwrap();
    assert!((c.d - 1.0).abs() < 0.02, "{c:?}");
    assert!((c.rho - 2f64.ln()).abs() < 0.02 * 2f64.ln(), "{c:?}");
    for m in -20..=20i64 {
        for n in -20..=20i64 {
            let g = shadowkit::linalg::op_norm(&green_discrete(&lin, &p, m, n).unwrap());
            assert!(g * (c.rho * (m - n).abs() as f64).exp() <= c.d * (1.0 + 1e-6));
        }
    }
}

#[test]
fn constant_kernel_has_no_dichotomy() {
    let evo = EvolutionFamily::covering(
        LinearPartContinuous::constant(diag(&[0.0])),
        -10.0,
        10.0,
        0.1,
    );
    let r = certify_dichotomy_continuous(
        &evo,
        &ProjectionFamily::Identity,
        -10.0,
        10.0,
        0.5,
        Exec::Sequential,
    );
    assert!(matches!(r, Err(Error::NoDichotomy { .. })), "{r:?}");
}

#[test]
fn non_idempotent_projection_rejected() {
    let p = ProjectionFamily::<i64>::Constant(diag(&[0.5]));
    assert!(matches!(
        p.check_idempotent(0..3, 1),
        Err(Error::NotIdempotent { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cocycle_composes(seed in any::<u64>(), d in 1usize..=4, a in -8i64..=8, b in -8i64..=8, c in -8i64..=8) {
        let mut r = rng(seed);
        let w = IndexWindow::new(-8, 8, 0).unwrap();
        let lin = random_linear(&mut r, d, w);
        let lhs = cocycle(&lin, a, b).unwrap() * cocycle(&lin, b, c).unwrap();
        let rhs = cocycle(&lin, a, c).unwrap();
        prop_assert!(max_abs(&(lhs - &rhs)) <= 1e-10 * (1.0 + max_abs(&rhs)));
    }

    #[test]
    fn green_recurrence(seed in any::<u64>(), d in 1usize..=4) {
        let mut r = rng(seed);
        let w = IndexWindow::new(0, 12, 0).unwrap();
        let lin = random_linear(&mut r, d, w);
        let mut pd = vec![1.0; d];
        pd[d - 1] = 0.0;
        let p = ProjectionFamily::Constant(diag(&pd));
        for n in 0..12i64 {
            for k in 0..=12i64 {
                let step = lin.matrix(n).unwrap() * green_discrete(&lin, &p, n, k).unwrap();
                let next = green_discrete(&lin, &p, n + 1, k).unwrap();
                let jump = if k == n + 1 { DMatrix::identity(d, d) } else { DMatrix::zeros(d, d) };
                prop_assert!(max_abs(&(next - step - jump)) <= 1e-10);
            }
        }
    }
}
