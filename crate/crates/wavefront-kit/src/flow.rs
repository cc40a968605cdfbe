//! The cogeodesic Hamiltonian flow (x*(t; y, eta), xi*(t; y, eta)) and its
//! momentum derivatives.
//!
//! Built-in models evaluate the flow in closed form through their ambient
//! embeddings: the position is exp_y(t eta#/h) and the momentum is h times
//! the flat of the unit velocity, which stays valid across chart-singular
//! antipodes and at jet-valued time and momentum. The conformal model
//! integrates Hamilton's equations; jet-valued momenta turn that one
//! integration into the variational hierarchy.

use crate::error::{Result, WfError};
use crate::geometry::{Cot, MetricModel, ModelKind, Pt, quad_form, wrap_diff};
use crate::jets::{self, Jet};
use crate::ode;
use crate::scalar::{C64, Field};

#[derive(Clone, Debug)]
pub struct FlowState {
    pub t: f64,
    pub x_star: Pt,
    pub xi_star: Cot,
    /// dx_deta[alpha][beta] = d x*^alpha / d eta_beta
    pub dx_deta: [[f64; 2]; 2],
    /// dxi_deta[alpha][beta] = d xi*_alpha / d eta_beta
    pub dxi_deta: [[f64; 2]; 2],
}

pub fn hamiltonian(model: &MetricModel, x: Pt, xi: Cot) -> Result<f64> {
    if xi[0] == 0.0 && xi[1] == 0.0 {
        return Err(WfError::ZeroCovector);
    }
    let md = model.metric_at(x)?;
    Ok(quad_form(&md.g_inv, &xi, &xi).sqrt())
}

/// Closed-form flow for the built-in models, generic over the scalar field.
/// `t` is passed as a scalar so jet-valued time rides along.
pub fn flow_closed<S: Field>(
    model: &MetricModel,
    y: Pt,
    t: &S,
    eta: &[S; 2],
) -> Result<([S; 2], [S; 2])> {
    let gi = model.metric_at(y)?.g_inv;
    let h2 = eta[0].mul(&eta[0]).scale(gi[0][0]).add(
        &eta[0]
            .mul(&eta[1])
            .scale(gi[0][1] + gi[1][0])
            .add(&eta[1].mul(&eta[1]).scale(gi[1][1])),
    );
    if h2.re_const() <= 0.0 {
        return Err(WfError::ZeroCovector);
    }
    let h = h2.sqrt();
    let hinv = h.recip();
    // unit chart velocity v = g^{-1} eta / h
    let v = [
        eta[0]
            .scale(gi[0][0])
            .add(&eta[1].scale(gi[0][1]))
            .mul(&hinv),
        eta[0]
            .scale(gi[1][0])
            .add(&eta[1].scale(gi[1][1]))
            .mul(&hinv),
    ];
    match model.kind {
        ModelKind::Sphere2 { radius } => {
            let yl = [t.lift(y[0]), t.lift(y[1])];
            let p = model.sphere_embed_unit(radius, &yl);
            let jac = model.sphere_embed_jac(radius, &yl);
            // unit tangent on the unit sphere
            let mut u = [t.lift(0.0), t.lift(0.0), t.lift(0.0)];
            for i in 0..3 {
                u[i] = jac[0][i].mul(&v[0]).add(&jac[1][i].mul(&v[1])).scale(radius);
            }
            let theta = t.scale(1.0 / radius);
            let (ct, st) = (theta.cos(), theta.sin());
            let mut xx = [t.lift(0.0), t.lift(0.0), t.lift(0.0)];
            let mut dx = [t.lift(0.0), t.lift(0.0), t.lift(0.0)];
            for i in 0..3 {
                xx[i] = ct.mul(&p[i]).add(&st.mul(&u[i]));
                dx[i] = st.mul(&p[i]).neg().add(&ct.mul(&u[i])).scale(1.0 / radius);
            }
            // chart point and chart velocity via the inverse stereographic map
            let denom = xx[2].neg().add(&t.lift(1.0));
            if denom.re_const() <= 1e-12 {
                return Err(WfError::PointOutsideChart(f64::INFINITY, f64::INFINITY));
            }
            let dinv = denom.recip();
            let x_star = [
                xx[0].mul(&dinv).scale(2.0 * radius),
                xx[1].mul(&dinv).scale(2.0 * radius),
            ];
            let dinv2 = dinv.mul(&dinv);
            let xdot = [
                dx[0]
                    .mul(&denom)
                    .add(&xx[0].mul(&dx[2]))
                    .mul(&dinv2)
                    .scale(2.0 * radius),
                dx[1]
                    .mul(&denom)
                    .add(&xx[1].mul(&dx[2]))
                    .mul(&dinv2)
                    .scale(2.0 * radius),
            ];
            let g = model.metric_generic(&x_star);
            let xi_star = [
                g[0][0].mul(&xdot[0]).add(&g[0][1].mul(&xdot[1])).mul(&h),
                g[1][0].mul(&xdot[0]).add(&g[1][1].mul(&xdot[1])).mul(&h),
            ];
            Ok((x_star, xi_star))
        }
        ModelKind::Hyperbolic2 { scale } => {
            let yl = [t.lift(y[0]), t.lift(y[1])];
            let p = model.hyper_embed_unit(scale, &yl);
            let jac = model.hyper_embed_jac(scale, &yl);
            let mut u = [t.lift(0.0), t.lift(0.0), t.lift(0.0)];
            for i in 0..3 {
                u[i] = jac[0][i].mul(&v[0]).add(&jac[1][i].mul(&v[1])).scale(scale);
            }
            let theta = t.scale(1.0 / scale);
            let (ch, sh) = (theta.cosh(), theta.sinh());
            let x_star = [
                ch.mul(&p[0]).add(&sh.mul(&u[0])).scale(scale),
                ch.mul(&p[1]).add(&sh.mul(&u[1])).scale(scale),
            ];
            let xdot = [
                sh.mul(&p[0]).add(&ch.mul(&u[0])),
                sh.mul(&p[1]).add(&ch.mul(&u[1])),
            ];
            let g = model.metric_generic(&x_star);
            let xi_star = [
                g[0][0].mul(&xdot[0]).add(&g[0][1].mul(&xdot[1])).mul(&h),
                g[1][0].mul(&xdot[0]).add(&g[1][1].mul(&xdot[1])).mul(&h),
            ];
            Ok((x_star, xi_star))
        }
        ModelKind::FlatTorus2 { .. } => {
            let x_star = [
                t.mul(&v[0]).add(&t.lift(y[0])),
                t.mul(&v[1]).add(&t.lift(y[1])),
            ];
            Ok((x_star, eta.clone()))
        }
        ModelKind::Conformal { .. } => Err(WfError::ModelLoad(
            "no closed-form flow for conformal models".into(),
        )),
    }
}

/// Hamilton RHS for state (x, xi), generic so jets integrate the variational
/// system alongside.
pub fn hamilton_rhs<S: Field>(model: &MetricModel, y: &[S]) -> Vec<S> {
    let x = [y[0].clone(), y[1].clone()];
    let xi = [y[2].clone(), y[3].clone()];
    let gi = model.cometric_generic(&x);
    let gg = model.cometric_grad_generic(&x);
    let h2 = gi[0][0]
        .mul(&xi[0])
        .mul(&xi[0])
        .add(&gi[0][1].mul(&xi[0]).mul(&xi[1]).scale(2.0))
        .add(&gi[1][1].mul(&xi[1]).mul(&xi[1]));
    let hinv = h2.sqrt().recip();
    let mut out = Vec::with_capacity(4);
    for a in 0..2 {
        out.push(
            gi[a][0]
                .mul(&xi[0])
                .add(&gi[a][1].mul(&xi[1]))
                .mul(&hinv),
        );
    }
    for a in 0..2 {
        let q = gg[a][0][0]
            .mul(&xi[0])
            .mul(&xi[0])
            .add(&gg[a][0][1].mul(&xi[0]).mul(&xi[1]).scale(2.0))
            .add(&gg[a][1][1].mul(&xi[1]).mul(&xi[1]));
        out.push(q.mul(&hinv).scale(-0.5));
    }
    out
}

fn state_from_jets(model: &MetricModel, t: f64, x: &[Jet<C64>; 2], xi: &[Jet<C64>; 2]) -> FlowState {
    let mut dx = [[0.0; 2]; 2];
    let mut dxi = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let e = if b == 0 { [1, 0] } else { [0, 1] };
            dx[a][b] = x[a].coeff(&e).unwrap().re;
            dxi[a][b] = xi[a].coeff(&e).unwrap().re;
        }
    }
    FlowState {
        t,
        x_star: model.normalize_point([x[0].value().re, x[1].value().re]),
        xi_star: [xi[0].value().re, xi[1].value().re],
        dx_deta: dx,
        dxi_deta: dxi,
    }
}

/// Flow state (with first momentum derivatives) at a single time.
pub fn flow_state(model: &MetricModel, y: Pt, eta: Cot, t: f64) -> Result<FlowState> {
    if eta == [0.0, 0.0] {
        return Err(WfError::ZeroCovector);
    }
    if t == 0.0 {
        model.check_chart(y)?;
        return Ok(FlowState {
            t,
            x_star: y,
            xi_star: eta,
            dx_deta: [[0.0; 2]; 2],
            dxi_deta: [[1.0, 0.0], [0.0, 1.0]],
        });
    }
    match model.kind {
        ModelKind::Conformal { .. } => {
            Ok(integrate_flow(model, y, eta, &[t], 1e-12)?.pop().unwrap())
        }
        _ => {
            let sh = jets::shape(2, 1);
            let tl = Jet::constant(&sh, C64::new(t, 0.0));
            let ej = [
                Jet::variable(&sh, 0, C64::new(eta[0], 0.0)),
                Jet::variable(&sh, 1, C64::new(eta[1], 0.0)),
            ];
            let (x, xi) = flow_closed(model, y, &tl, &ej)?;
            Ok(state_from_jets(model, t, &x, &xi))
        }
    }
}

/// Flow states over a time grid. Built-ins evaluate the closed form per
/// sample; the conformal model advances one adaptive integration through the
/// grid (processed in sorted order, returned in the caller's order).
pub fn integrate_flow(
    model: &MetricModel,
    y: Pt,
    eta: Cot,
    t_grid: &[f64],
    tol: f64,
) -> Result<Vec<FlowState>> {
    if eta == [0.0, 0.0] {
        return Err(WfError::ZeroCovector);
    }
    model.check_chart(y)?;
    match model.kind {
        ModelKind::Conformal { .. } => {
            let sh = jets::shape(2, 1);
            let mut order: Vec<usize> = (0..t_grid.len()).collect();
            order.sort_by(|&a, &b| t_grid[a].partial_cmp(&t_grid[b]).unwrap());
            let mut out: Vec<Option<FlowState>> = vec![None; t_grid.len()];
            // walk negative times from 0 backwards, positive forwards
            for dir in [-1.0, 1.0] {
                let mut state = vec![
                    Jet::constant(&sh, C64::new(y[0], 0.0)),
                    Jet::constant(&sh, C64::new(y[1], 0.0)),
                    Jet::variable(&sh, 0, C64::new(eta[0], 0.0)),
                    Jet::variable(&sh, 1, C64::new(eta[1], 0.0)),
                ];
                let mut tcur = 0.0;
                let idxs: Vec<usize> = if dir > 0.0 {
                    order
                        .iter()
                        .copied()
                        .filter(|&i| t_grid[i] >= 0.0)
                        .collect()
                } else {
                    order
                        .iter()
                        .rev()
                        .copied()
                        .filter(|&i| t_grid[i] < 0.0)
                        .collect()
                };
                for i in idxs {
                    state = ode::integrate(
                        &|_t, s: &[Jet<C64>]| Ok(hamilton_rhs(model, s)),
                        tcur,
                        state,
                        t_grid[i],
                        tol,
                        tol,
                        &|j| j.max_norm(),
                    )?;
                    tcur = t_grid[i];
                    let x = [state[0].clone(), state[1].clone()];
                    let xi = [state[2].clone(), state[3].clone()];
                    out[i] = Some(state_from_jets(model, tcur, &x, &xi));
                }
            }
            Ok(out.into_iter().map(|s| s.unwrap()).collect())
        }
        _ => t_grid
            .iter()
            .map(|&t| flow_state(model, y, eta, t))
            .collect(),
    }
}

/// Times T <= t_max at which the trajectory returns to y (chart distance
/// below tolerance), flagged when the transverse Jacobi field also collapses
/// (momentum-focused return).
pub fn loop_detect(model: &MetricModel, y: Pt, eta: Cot, t_max: f64) -> Result<Vec<(f64, bool)>> {
    if eta == [0.0, 0.0] {
        return Err(WfError::ZeroCovector);
    }
    let dist = |t: f64| -> f64 {
        match flow_state(model, y, eta, t) {
            Ok(s) => chart_sep(model, s.x_star, y),
            Err(_) => f64::INFINITY,
        }
    };
    let dt = 5e-3;
    let mut out = Vec::new();
    let mut t = dt;
    let mut prev = dist(t - dt);
    let mut cur = dist(t);
    while t + dt <= t_max {
        let next = dist(t + dt);
        if cur <= prev && cur <= next && cur < 0.05 {
            // refine the local minimum by golden-section
            let (mut a, mut b) = (t - dt, t + dt);
            for _ in 0..200 {
                let m1 = a + 0.381_966_011 * (b - a);
                let m2 = b - 0.381_966_011 * (b - a);
                if dist(m1) < dist(m2) {
                    b = m2;
                } else {
                    a = m1;
                }
                if b - a < 1e-12 {
                    break;
                }
            }
            let tstar = 0.5 * (a + b);
            if dist(tstar) < 1e-8 && tstar > 1e-6 {
                let s = flow_state(model, y, eta, tstar)?;
                out.push((tstar, transverse_jacobi(model, &s, eta) < 1e-6));
            }
        }
        prev = cur;
        cur = next;
        t += dt;
    }
    Ok(out)
}

fn chart_sep(model: &MetricModel, a: Pt, b: Pt) -> f64 {
    match model.kind {
        ModelKind::FlatTorus2 { lx, ly } => {
            let d = [wrap_diff(a[0] - b[0], lx), wrap_diff(a[1] - b[1], ly)];
            (d[0] * d[0] + d[1] * d[1]).sqrt()
        }
        _ => ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt(),
    }
}

/// g-norm of x*_eta applied to the unit covector direction transverse to eta.
/// By homogeneity x*_eta annihilates eta itself, so this is the part that
/// detects focusing.
pub fn transverse_jacobi(model: &MetricModel, s: &FlowState, eta: Cot) -> f64 {
    let n = (eta[0] * eta[0] + eta[1] * eta[1]).sqrt();
    let tau = [-eta[1] / n, eta[0] / n];
    let j = [
        s.dx_deta[0][0] * tau[0] + s.dx_deta[0][1] * tau[1],
        s.dx_deta[1][0] * tau[0] + s.dx_deta[1][1] * tau[1],
    ];
    match model.metric_at(s.x_star) {
        Ok(md) => quad_form(&md.g, &j, &j).max(0.0).sqrt(),
        Err(_) => f64::INFINITY,
    }
}
