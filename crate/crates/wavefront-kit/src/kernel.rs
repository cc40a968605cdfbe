//! The propagator kernel two ways: as the global oscillatory integral with a
//! Gaussian momentum regulator, and as the exact regulated spectral sum on
//! the sphere. Both apply the same damping e^{-(lambda/R)^2}, so their values
//! are directly comparable.

use rayon::prelude::*;

use crate::error::{Result, WfError};
use crate::flow;
use crate::geometry::{MetricModel, ModelKind, Pt};
use crate::phase;
use crate::quad;
use crate::scalar::{C64, c64};
use crate::symbolcalc;

#[derive(Clone, Debug)]
pub struct KernelRequest {
    pub t: f64,
    pub x: Pt,
    pub y: Pt,
    pub eps: f64,
    /// 0: principal symbol only; 1: include the degree minus-one component.
    pub symbol_depth: usize,
    /// Gaussian damping e^{-(r/R)^2} in radial momentum.
    pub regulator_scale: f64,
    pub angular_nodes: usize,
    pub radial_nodes: usize,
}

impl KernelRequest {
    pub fn new(t: f64, x: Pt, y: Pt) -> Self {
        KernelRequest {
            t,
            x,
            y,
            eps: 1.0,
            symbol_depth: 1,
            regulator_scale: 30.0,
            angular_nodes: 256,
            radial_nodes: 400,
        }
    }
}

/// Exact spectral reference on the sphere.
#[derive(Clone, Debug)]
pub struct SpectralReference {
    pub radius: f64,
    pub l_max: usize,
    /// Use sqrt(-Laplacian + 1/4), whose eigenvalues are l + 1/2.
    pub quarter_shift: bool,
}

impl SpectralReference {
    /// Pick l_max so the regulated tail is below 1e-12.
    pub fn auto(radius: f64, regulator_scale: f64, quarter_shift: bool) -> Self {
        let mut l = 8usize;
        while {
            let lam = eigenvalue(l, radius, quarter_shift);
            (-(lam / regulator_scale).powi(2)).exp() * (2.0 * l as f64 + 1.0) >= 1e-12
        } {
            l += 8;
        }
        SpectralReference {
            radius,
            l_max: l,
            quarter_shift,
        }
    }
}

fn eigenvalue(l: usize, radius: f64, quarter_shift: bool) -> f64 {
    let ll = l as f64;
    if quarter_shift {
        (ll * (ll + 1.0) + 0.25).sqrt() / radius
    } else {
        (ll * (ll + 1.0)).sqrt() / radius
    }
}

/// Legendre polynomial values P_0..P_n at c by the three-term recurrence.
pub fn legendre_values(n: usize, c: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    if n >= 1 {
        p.push(c);
    }
    for l in 2..=n {
        let lf = l as f64;
        let v = ((2.0 * lf - 1.0) * c * p[l - 1] - (lf - 1.0) * p[l - 2]) / lf;
        p.push(v);
    }
    p
}

/// Regulated spectral kernel: sum_l e^{-i t lam_l} e^{-(lam_l/R)^2}
/// (2l+1)/(4 pi R_s^2) P_l(cos Theta).
pub fn kernel_spectral(
    model: &MetricModel,
    reference: &SpectralReference,
    t: f64,
    x: Pt,
    y: Pt,
    regulator_scale: f64,
) -> Result<C64> {
    let radius = match model.kind {
        ModelKind::Sphere2 { radius } => radius,
        _ => {
            return Err(WfError::ModelLoad(
                "spectral reference exists for the sphere only".into(),
            ));
        }
    };
    let lam_top = eigenvalue(reference.l_max, radius, reference.quarter_shift);
    let tail = (-(lam_top / regulator_scale).powi(2)).exp() * (2.0 * reference.l_max as f64 + 1.0);
    if tail >= 1e-12 {
        return Err(WfError::TruncationInsufficient(tail));
    }
    let theta = model.geodesic_distance(x, y)? / radius;
    let pl = legendre_values(reference.l_max, theta.cos());
    let mut acc = C64::ZERO;
    for l in 0..=reference.l_max {
        let lam = eigenvalue(l, radius, reference.quarter_shift);
        let damp = (-(lam / regulator_scale).powi(2)).exp();
        let mult = (2.0 * l as f64 + 1.0) / (4.0 * std::f64::consts::PI * radius * radius);
        acc += c64(0.0, -t * lam).exp() * damp * mult * pl[l];
    }
    Ok(acc)
}

/// Symmetric square root of a 2x2 SPD matrix.
fn sqrt_spd(a: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = (a[0][0] * a[1][1] - a[0][1] * a[1][0]).max(0.0);
    let s = det.sqrt();
    let tr = a[0][0] + a[1][1];
    let denom = (tr + 2.0 * s).sqrt();
    [
        [(a[0][0] + s) / denom, a[0][1] / denom],
        [a[1][0] / denom, (a[1][1] + s) / denom],
    ]
}

fn smooth_radial_cut(r: f64) -> f64 {
    // same radial profile as the cut-off chi: 0 below 1/2, 1 above 1
    if r <= 0.5 {
        0.0
    } else if r >= 1.0 {
        1.0
    } else {
        let tau = (r - 0.5) / 0.5;
        let e = (-1.0 / tau).exp();
        let f = (-1.0 / (1.0 - tau)).exp();
        e / (e + f)
    }
}

/// The weight w(t, x; y, omega) at a point x off the flow, with the quartic
/// root branch continued from the on-flow tracker value along the geodesic
/// from x*(t) to x.
fn weight_off_flow(
    model: &MetricModel,
    t: f64,
    x: Pt,
    y: Pt,
    omega: [f64; 2],
    eps: f64,
    arg_on_flow: f64,
    x_star: Pt,
) -> Result<C64> {
    let steps = 8usize;
    let v = model.exp_inverse(x_star, x)?;
    let mut arg = 2.0 * arg_on_flow; // arg of det^2 on the flow
    let mut prev: Option<C64> = None;
    let mut det2 = C64::ZERO;
    for k in 0..=steps {
        let s = k as f64 / steps as f64;
        let xs = model.exp_map(x_star, [v[0] * s, v[1] * s])?;
        let pe = phase::phase_eval(model, t, xs, y, omega, eps)?;
        let m = pe.d_x_d_eta;
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let d2 = det * det;
        if d2.norm() < 1e-14 {
            return Err(WfError::BranchDegenerate(t));
        }
        if let Some(p) = prev {
            arg += (d2 / p).arg();
        }
        prev = Some(d2);
        det2 = d2;
    }
    let rho_x = model.rho(x)?;
    let rho_y = model.rho(y)?;
    Ok(det2.norm().powf(0.25) * c64(0.0, arg / 4.0).exp() / (rho_x * rho_y).sqrt())
}

/// The kernel as a regulated oscillatory integral over the cotangent fibre,
/// using homogeneity to split radial and angular integrations: directions run
/// over the unit-Hamiltonian circle, and the amplitude at depth one is
/// 1 + a_{-1}(omega)/r.
pub fn kernel_oscillatory(model: &MetricModel, req: &KernelRequest) -> Result<C64> {
    if req.regulator_scale < 1.0 {
        return Err(WfError::ConfigParse("regulator scale must be >= 1".into()));
    }
    let n_ang = req.angular_nodes.max(256);
    let n_rad = req.radial_nodes.max(400);
    let my = model.metric_at(req.y)?;
    let msqrt = sqrt_spd(&my.g);
    let rho_y = my.rho;
    // composite radial rule: the cut-off transition [1/2, 1] gets its own
    // panel, the damped bulk [1, 4R] the main rule
    let rmax = 4.0 * req.regulator_scale;
    let mut radial: Vec<(f64, f64)> = Vec::with_capacity(n_rad + 48);
    let (tn, tw) = quad::gauss_legendre(48);
    for (&z, &w) in tn.iter().zip(&tw) {
        let r = 0.75 + 0.25 * z;
        radial.push((r, 0.25 * w * smooth_radial_cut(r) * (-(r / req.regulator_scale).powi(2)).exp()));
    }
    let (gl_nodes, gl_weights) = quad::gauss_legendre(n_rad);
    let half = 0.5 * (rmax - 1.0);
    for (&z, &w) in gl_nodes.iter().zip(&gl_weights) {
        let r = 1.0 + half * (z + 1.0);
        radial.push((r, half * w * (-(r / req.regulator_scale).powi(2)).exp()));
    }

    let contributions: Vec<Result<C64>> = (0..n_ang)
        .into_par_iter()
        .map(|k| -> Result<C64> {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n_ang as f64;
            let u = [th.cos(), th.sin()];
            let omega = [
                msqrt[0][0] * u[0] + msqrt[0][1] * u[1],
                msqrt[1][0] * u[0] + msqrt[1][1] * u[1],
            ];
            let state = match flow::flow_state(model, req.y, omega, req.t) {
                Ok(s) => s,
                Err(_) => return Ok(C64::ZERO), // chart-excluded direction: cut off
            };
            let rinj = model.injectivity_radius(state.x_star);
            let dist = match model.geodesic_distance(req.x, state.x_star) {
                Ok(d) => d,
                Err(_) => return Ok(C64::ZERO),
            };
            let chi_sp = if rinj.is_infinite() {
                1.0
            } else {
                1.0 - smooth_radial_cut(0.5 + 0.5 * (dist / rinj - 0.5) / 0.3)
            };
            if chi_sp == 0.0 {
                return Ok(C64::ZERO);
            }
            let pe = phase::phase_eval(model, req.t, req.x, req.y, omega, req.eps)?;
            let phi1 = pe.value;
            // branch-tracked on-flow argument, then continued out to x
            let (y2, e2) = phase::normalized_config(model, req.y, omega)?;
            let mut tracker = phase::BranchTracker::new(y2, e2, req.eps);
            let arg_flow = tracker.arg_at(model, req.t)?;
            let w = weight_off_flow(
                model,
                req.t,
                req.x,
                req.y,
                omega,
                req.eps,
                arg_flow,
                state.x_star,
            )?;
            let a1 = if req.symbol_depth >= 1 {
                symbolcalc::subprincipal_symbol(model, req.y, omega, req.eps, req.t, 1e-8)?
            } else {
                C64::ZERO
            };
            // int (r + a1) chi_rad e^{-(r/R)^2} e^{i r phi1} dr
            let mut rad = C64::ZERO;
            for &(r, wt) in &radial {
                rad += (c64(r, 0.0) + a1) * (phi1 * c64(0.0, r)).exp() * wt;
            }
            Ok(rad * w * chi_sp)
        })
        .collect();

    let mut acc = C64::ZERO;
    let mut active = 0usize;
    for c in contributions {
        let v = c?;
        if v != C64::ZERO {
            active += 1;
        }
        acc += v;
    }
    if active == 0 {
        return Err(WfError::NoStationaryDirection);
    }
    let dtheta = 2.0 * std::f64::consts::PI / n_ang as f64;
    Ok(acc * rho_y * dtheta / (4.0 * std::f64::consts::PI * std::f64::consts::PI))
}
