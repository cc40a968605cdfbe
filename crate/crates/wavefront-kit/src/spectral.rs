//! Weyl coefficients of the mollified local counting function and their
//! verification against the exact sphere spectrum and heat-trace expansions.

use crate::error::{Result, WfError};
use crate::geometry::{MetricModel, ModelKind};
use crate::quad;
use crate::scalar::c64;

#[derive(Clone, Debug)]
pub struct WeylCoefficients {
    pub d: usize,
    pub scalar_curv: f64,
    /// c_{d-1}
    pub c_dm1: f64,
    /// c_{d-2} (vanishes)
    pub c_dm2: f64,
    /// c_{d-3}
    pub c_dm3: f64,
}

/// Gamma(d/2) for integer d >= 1.
fn gamma_half_integer(d: usize) -> f64 {
    if d % 2 == 0 {
        // Gamma(n) = (n-1)!
        let n = d / 2;
        (1..n).map(|k| k as f64).product::<f64>().max(1.0)
    } else {
        // Gamma(k + 1/2) = (2k)! sqrt(pi) / (4^k k!)
        let k = (d - 1) / 2;
        let num: f64 = (1..=2 * k).map(|i| i as f64).product::<f64>().max(1.0);
        let den: f64 = 4f64.powi(k as i32) * (1..=k).map(|i| i as f64).product::<f64>().max(1.0);
        num / den * std::f64::consts::PI.sqrt()
    }
}

/// First three Weyl coefficients of (N' * mu)(y, lambda):
/// c_{d-1} = S_{d-1}/(2 pi)^d, c_{d-2} = 0, c_{d-3} = (d-2)/12 R c_{d-1}.
pub fn weyl_coefficients(d: usize, scalar_curv: f64) -> WeylCoefficients {
    assert!(d >= 2);
    let s_dm1 = 2.0 * std::f64::consts::PI.powf(d as f64 / 2.0) / gamma_half_integer(d);
    let c_dm1 = s_dm1 / (2.0 * std::f64::consts::PI).powi(d as i32);
    WeylCoefficients {
        d,
        scalar_curv,
        c_dm1,
        c_dm2: 0.0,
        c_dm3: (d as f64 - 2.0) / 12.0 * scalar_curv * c_dm1,
    }
}

/// Gaussian-mollified derivative of the local counting function on the unit
/// sphere: (N' * mu)(y, lambda) = sum_l (2l+1)/(4 pi) mu(lambda - sqrt(l(l+1))).
pub fn mollified_counting_derivative(
    l_max: usize,
    lambda_grid: &[f64],
    sigma: f64,
) -> Result<Vec<f64>> {
    let lam_top = (l_max as f64 * (l_max as f64 + 1.0)).sqrt();
    let lam_need = lambda_grid.iter().cloned().fold(0.0, f64::max) + 8.0 * sigma;
    if lam_top < lam_need {
        return Err(WfError::SpectrumTruncated {
            l_max,
            lambda: lam_need,
        });
    }
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    Ok(lambda_grid
        .iter()
        .map(|&lam| {
            let mut acc = 0.0;
            for l in 0..=l_max {
                let ll = l as f64;
                let lam_l = (ll * (ll + 1.0)).sqrt();
                let z = (lam - lam_l) / sigma;
                if z.abs() < 12.0 {
                    acc += (2.0 * ll + 1.0) / (4.0 * std::f64::consts::PI)
                        * norm
                        * (-0.5 * z * z).exp();
                }
            }
            acc
        })
        .collect())
}

/// Relative residual of the local heat trace against the two-term expansion
/// (4 pi t)^{-1} (1 + R t / 6).
pub fn heat_trace_check(model: &MetricModel, t_grid: &[f64]) -> Result<Vec<f64>> {
    t_grid
        .iter()
        .map(|&t| {
            if !(0.0..=0.5).contains(&t) || t == 0.0 {
                return Err(WfError::ConfigParse(format!(
                    "heat-trace time {t} outside (0, 0.5]"
                )));
            }
            let z = heat_trace(model, t)?;
            let scal = match model.kind {
                ModelKind::Sphere2 { radius } => 2.0 / (radius * radius),
                ModelKind::Hyperbolic2 { scale } => -2.0 / (scale * scale),
                ModelKind::FlatTorus2 { .. } => 0.0,
                ModelKind::Conformal { .. } => {
                    return Err(WfError::ModelLoad(
                        "heat trace check needs a spectrum or closed form".into(),
                    ));
                }
            };
            let expansion = (1.0 + scal * t / 6.0) / (4.0 * std::f64::consts::PI * t);
            Ok((z - expansion) / expansion)
        })
        .collect()
}

/// Local heat trace Z(y, t): spectral sums on the sphere and the torus,
/// the exact closed-form diagonal on the hyperbolic plane.
pub fn heat_trace(model: &MetricModel, t: f64) -> Result<f64> {
    match model.kind {
        ModelKind::Sphere2 { radius } => {
            let r2 = radius * radius;
            let mut acc = 0.0;
            let mut l = 0usize;
            loop {
                let ll = l as f64;
                let term =
                    (2.0 * ll + 1.0) / (4.0 * std::f64::consts::PI * r2) * (-t * ll * (ll + 1.0) / r2).exp();
                acc += term;
                if term < 1e-16 && ll * ll * t / r2 > 40.0 {
                    break;
                }
                l += 1;
                if l > 500_000 {
                    break;
                }
            }
            Ok(acc)
        }
        ModelKind::FlatTorus2 { lx, ly } => {
            // eigenvalues (2 pi m / lx)^2 + (2 pi n / ly)^2, |v|^2 = 1/(lx ly)
            let mut acc = 0.0;
            let mmax = (lx / (2.0 * std::f64::consts::PI) * (40.0 / t).sqrt()).ceil() as i64 + 1;
            let nmax = (ly / (2.0 * std::f64::consts::PI) * (40.0 / t).sqrt()).ceil() as i64 + 1;
            for m in -mmax..=mmax {
                for n in -nmax..=nmax {
                    let lam2 = (2.0 * std::f64::consts::PI * m as f64 / lx).powi(2)
                        + (2.0 * std::f64::consts::PI * n as f64 / ly).powi(2);
                    acc += (-t * lam2).exp();
                }
            }
            Ok(acc / (lx * ly))
        }
        ModelKind::Hyperbolic2 { scale } => {
            // exact diagonal: sqrt(2) e^{-t/4}/(4 pi t)^{3/2}
            //                 int_0^inf s e^{-s^2/4t} / sqrt(cosh s - 1) ds
            // (unit curvature scale; general scale by t -> t/a^2, Z -> Z/a^2)
            let ts = t / (scale * scale);
            let integral = quad::adaptive(
                |s| {
                    if s == 0.0 {
                        // limit of s / (sqrt(2) sinh(s/2))
                        return Ok(c64(2.0f64.sqrt(), 0.0));
                    }
                    // cosh s - 1 = 2 sinh^2(s/2), stable near zero
                    let den = 2.0f64.sqrt() * (s / 2.0).sinh();
                    Ok(c64(s * (-s * s / (4.0 * ts)).exp() / den, 0.0))
                },
                0.0,
                60.0 * ts.sqrt().max(1.0),
                1e-13,
            )?
            .re;
            let z = 2.0f64.sqrt() * (-ts / 4.0).exp()
                / (4.0 * std::f64::consts::PI * ts).powf(1.5)
                * integral;
            Ok(z / (scale * scale))
        }
        ModelKind::Conformal { .. } => Err(WfError::ModelLoad(
            "heat trace needs a spectrum or closed form".into(),
        )),
    }
}
