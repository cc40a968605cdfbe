//! Quadrature: adaptive Gauss-Kronrod 7/15 for complex integrands and
//! Gauss-Legendre node generation for the fixed radial rules.

use crate::error::{Result, WfError};
use crate::scalar::C64;

// QUADPACK QK15 abscissae and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_7,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

fn gk15<F>(f: &mut F, a: f64, b: f64) -> Result<(C64, f64)>
where
    F: FnMut(f64) -> Result<C64>,
{
    let c = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, &x) in XGK.iter().enumerate().take(7) {
        let fp = f(c + half * x)?;
        let fm = f(c - half * x)?;
        kronrod += (fp + fm) * WGK[j];
        if j % 2 == 1 {
            gauss += (fp + fm) * WG[j / 2];
        }
    }
    let val = kronrod * half;
    let err = (kronrod - gauss).norm() * half.abs();
    Ok((val, err))
}

/// Adaptive bisection Gauss-Kronrod to absolute tolerance `abs_tol`.
pub fn adaptive<F>(mut f: F, a: f64, b: f64, abs_tol: f64) -> Result<C64>
where
    F: FnMut(f64) -> Result<C64>,
{
    fn rec<F>(f: &mut F, a: f64, b: f64, tol: f64, depth: usize) -> Result<C64>
    where
        F: FnMut(f64) -> Result<C64>,
    {
        let (val, err) = gk15(f, a, b)?;
        if err <= tol || (b - a).abs() < 1e-13 {
            return Ok(val);
        }
        if depth > 40 {
            return Err(WfError::QuadratureFailure(format!(
                "panel [{a}, {b}] did not converge (err {err:.3e})"
            )));
        }
        let m = 0.5 * (a + b);
        Ok(rec(f, a, m, 0.5 * tol, depth + 1)? + rec(f, m, b, 0.5 * tol, depth + 1)?)
    }
    if a == b {
        return Ok(C64::ZERO);
    }
    rec(&mut f, a, b, abs_tol, 0)
}

/// Running integral of `f` over [0, t] for each t in the (sorted ascending)
/// grid, so that long sweeps share one pass.
pub fn cumulative<F>(mut f: F, ts: &[f64], abs_tol: f64) -> Result<Vec<C64>>
where
    F: FnMut(f64) -> Result<C64>,
{
    let mut out = Vec::with_capacity(ts.len());
    let mut acc = C64::ZERO;
    let mut prev = 0.0;
    for &t in ts {
        acc += adaptive(&mut f, prev, t, abs_tol)?;
        prev = t;
        out.push(acc);
    }
    Ok(out)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Newton from the Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_pair(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
