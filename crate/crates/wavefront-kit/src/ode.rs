//! Embedded Dormand-Prince 5(4) integrator, generic over the scalar field so
//! the same right-hand sides run at f64 and at jet-valued inputs (the jet
//! instantiation integrates the variational hierarchy for free).

use crate::error::{Result, WfError};
use crate::scalar::Field;

const A: [[f64; 6]; 6] = [
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
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

fn axpy<S: Field>(y: &[S], terms: &[(f64, &Vec<S>)], h: f64) -> Vec<S> {
    let mut out = y.to_vec();
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = o.lift(0.0);
        for (w, k) in terms {
            if *w != 0.0 {
                acc = acc.add(&k[i].scale(*w));
            }
        }
        *o = o.add(&acc.scale(h));
    }
    out
}

/// Integrate dy/dt = f(t, y) from `t0` to `t1` with adaptive steps.
pub fn integrate<S: Field>(
    f: &dyn Fn(f64, &[S]) -> Result<Vec<S>>,
    t0: f64,
    y0: Vec<S>,
    t1: f64,
    atol: f64,
    rtol: f64,
    norm: &dyn Fn(&S) -> f64,
) -> Result<Vec<S>> {
    if t0 == t1 {
        return Ok(y0);
    }
    let dir = (t1 - t0).signum();
    let mut t = t0;
    let mut y = y0;
    let mut h = (t1 - t0).abs().min(0.1).max(1e-8) * dir;
    let mut steps = 0usize;
    while (t - t1).abs() > 1e-14 * (1.0 + t1.abs()) {
        steps += 1;
        if steps > 200_000 {
            return Err(WfError::IntegratorDivergence(format!(
                "step budget exhausted at t = {t}"
            )));
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let k1 = f(t, &y)?;
        let y2 = axpy(&y, &[(A[0][0], &k1)], h);
        let k2 = f(t + C[0] * h, &y2)?;
        let y3 = axpy(&y, &[(A[1][0], &k1), (A[1][1], &k2)], h);
        let k3 = f(t + C[1] * h, &y3)?;
        let y4 = axpy(&y, &[(A[2][0], &k1), (A[2][1], &k2), (A[2][2], &k3)], h);
        let k4 = f(t + C[2] * h, &y4)?;
        let y5 = axpy(
            &y,
            &[
                (A[3][0], &k1),
                (A[3][1], &k2),
                (A[3][2], &k3),
                (A[3][3], &k4),
            ],
            h,
        );
        let k5 = f(t + C[3] * h, &y5)?;
        let y6 = axpy(
            &y,
            &[
                (A[4][0], &k1),
                (A[4][1], &k2),
                (A[4][2], &k3),
                (A[4][3], &k4),
                (A[4][4], &k5),
            ],
            h,
        );
        let k6 = f(t + C[4] * h, &y6)?;
        let ynew = axpy(
            &y,
            &[
                (A[5][0], &k1),
                (A[5][1], &k2),
                (A[5][2], &k3),
                (A[5][3], &k4),
                (A[5][4], &k5),
                (A[5][5], &k6),
            ],
            h,
        );
        let k7 = f(t + h, &ynew)?;
        let ks = [&k1, &k2, &k3, &k4, &k5, &k6, &k7];
        let mut err: f64 = 0.0;
        for i in 0..y.len() {
            let mut e = y[i].lift(0.0);
            for (j, k) in ks.iter().enumerate() {
                let w = B5[j] - B4[j];
                if w != 0.0 {
                    e = e.add(&k[i].scale(w));
                }
            }
            let scale = atol + rtol * norm(&y[i]).max(norm(&ynew[i]));
            err = err.max(norm(&e) * h.abs() / scale);
        }
        if err <= 1.0 {
            t += h;
            y = ynew;
        }
        let fac = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= fac;
        if h.abs() < 1e-15 * (1.0 + t.abs()) {
            return Err(WfError::IntegratorDivergence(format!(
                "step size underflow at t = {t}"
            )));
        }
    }
    Ok(y)
}
