//! Adaptive Dormand–Prince 5(4) propagation of the matrix equation `Y' = A(t) Y`.

use nalgebra::DMatrix;

use crate::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// 5th-order weights equal the last row of A (FSAL); these are the differences to the
// embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MAX_STEPS: usize = 1_000_000;

/// Integrates `Y' = A(t) Y` from `Y(s) = y0` to time `t` (either direction) with mixed
/// absolute/relative tolerance `tol`.
pub fn propagate<F>(a: &F, s: f64, t: f64, y0: DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>>
where
    F: Fn(f64) -> DMatrix<f64> + ?Sized,
{
    if s == t {
        return Ok(y0);
    }
    let dir = (t - s).signum();
    let span = (t - s).abs();
    let mut h = span.min(0.25);
    let mut time = s;
    let mut y = y0;
    let mut k0 = a(time) * &y;
    let mut steps = 0;

    while (t - time) * dir > 0.0 {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::Integration {
                t: time,
                reason: "step budget exhausted".into(),
            });
        }
        let remaining = (t - time).abs();
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        if h < 1e-13 * time.abs().max(1.0) {
            return Err(Error::Integration {
                t: time,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }
        let hs = h * dir;

        let mut k: Vec<DMatrix<f64>> = Vec::with_capacity(7);
        k.push(k0.clone());
        for i in 1..7 {
            let mut yi = y.clone();
            for (j, kj) in k.iter().enumerate().take(i) {
                if A[i][j] != 0.0 {
                    yi += kj * (hs * A[i][j]);
                }
            }
            let ki = a(time + C[i] * hs) * &yi;
            if i == 6 {
                // stage 7 is evaluated at the 5th-order solution itself
                let mut err = &k[0] * E[0];
                for (j, kj) in k.iter().enumerate().skip(1) {
                    if E[j] != 0.0 {
                        err += kj * E[j];
                    }
                }
                err += &ki * E[6];
                err *= hs;
                let mut ratio = 0.0f64;
                for ((e, y_old), y_new) in err.iter().zip(y.iter()).zip(yi.iter()) {
                    let sc = tol + tol * y_old.abs().max(y_new.abs());
                    ratio = ratio.max((e / sc).abs());
                }
                if !ratio.is_finite() {
                    return Err(Error::Integration {
                        t: time,
                        reason: "non-finite state".into(),
                    });
                }
                if ratio <= 1.0 {
                    time = if last { t } else { time + hs };
                    y = yi;
                    k0 = ki;
                    let grow = if ratio == 0.0 {
                        5.0
                    } else {
                        (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    h *= grow;
                } else {
                    h *= (0.9 * ratio.powf(-0.2)).clamp(0.1, 0.9);
                }
                break;
            }
            k.push(ki);
        }
    }
    Ok(y)
}
