//! The distinguished complex-valued phase function
//!
//!   phi(t, x; y, eta; eps) = <xi*, exp^{-1}_{x*}(x)> + (i eps/2) h(y,eta) dist^2(x, x*),
//!
//! its derivative jets, the branch-tracked weight
//!
//!   w = [rho(x) rho(y)]^{-1/2} [det^2 phi_{x eta}]^{1/4},
//!
//! and the cut-off chi. Jets are taken in the four variables (x1, x2, eta1,
//! eta2) about (x_base, eta0) with coefficients carrying a second-order time
//! expansion, so phi_t, phi_tt, w_t, w_tt fall out of the same pipeline.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Result, WfError};
use crate::flow::{self, FlowState};
use crate::geometry::{Cot, MetricModel, ModelKind, Pt, wrap_diff};
use crate::jets::{Jet, Shape, shape};
use crate::scalar::{self, C64, Field, TP, c64};

/// phi and its leading derivatives at one (t, x; y, eta; eps).
#[derive(Clone, Debug)]
pub struct PhaseEval {
    pub value: C64,
    pub d_t: C64,
    pub d_x: [C64; 2],
    pub d_eta: [C64; 2],
    pub d_x_d_eta: [[C64; 2]; 2],
    pub epsilon: f64,
    /// Full (x, eta) jet with time-expansion coefficients.
    pub jet: Jet<TP>,
}

#[derive(Clone, Debug)]
pub struct WeightEval {
    pub t: f64,
    pub value: C64,
    /// Continuously unwrapped argument of det^2 phi_{x eta} along the flow.
    pub branch_arg: f64,
    pub det2: C64,
}

// ---------------------------------------------------------------------------
// Phase jets
// ---------------------------------------------------------------------------

/// Flow jets in (eta1, eta2) with time-carrying coefficients, embedded into
/// the 4-variable (x, eta) algebra as variables 2 and 3.
pub(crate) fn flow_jets_tp(
    model: &MetricModel,
    y: Pt,
    eta0: Cot,
    t0: f64,
    sh4: &Arc<Shape>,
) -> Result<([Jet<TP>; 2], [Jet<TP>; 2])> {
    let sh2 = shape(2, sh4.order);
    let t = Jet::constant(&sh2, TP::time(t0));
    let ej = [
        Jet::variable(&sh2, 0, TP::constant(c64(eta0[0], 0.0))),
        Jet::variable(&sh2, 1, TP::constant(c64(eta0[1], 0.0))),
    ];
    let (xs, xis) = flow::flow_closed(model, y, &t, &ej)?;
    let map = [2usize, 3usize];
    Ok((
        [xs[0].embed(sh4, &map), xs[1].embed(sh4, &map)],
        [xis[0].embed(sh4, &map), xis[1].embed(sh4, &map)],
    ))
}

/// Everything the symbol algorithm needs at one (t; y, eta; eps).
pub(crate) struct PhaseJets {
    pub sh: Arc<Shape>,
    pub t: f64,
    pub eps: f64,
    pub h: f64,
    pub rho_y: f64,
    pub state: FlowState,
    /// x* and xi* as jets in eta (variables 2, 3).
    pub x_flow: [Jet<TP>; 2],
    pub xi_flow: [Jet<TP>; 2],
    pub phi: Jet<TP>,
    pub w: Jet<TP>,
    /// det^2 phi_{x eta} at the base point, on the tracked branch.
    pub det2_0: C64,
    pub branch_arg: f64,
}

/// Build the phase jet about (x_base, eta0). `x_base` need not lie on the
/// flow; for the symbol algorithm it does.
pub(crate) fn phi_jet_at(
    model: &MetricModel,
    t0: f64,
    x_base: Pt,
    y: Pt,
    eta0: Cot,
    eps: f64,
    sh4: &Arc<Shape>,
) -> Result<(Jet<TP>, [Jet<TP>; 2], [Jet<TP>; 2])> {
    if eta0 == [0.0, 0.0] {
        return Err(WfError::ZeroCovector);
    }
    model.check_chart(x_base)?;
    model.check_chart(y)?;
    let (xs, xis) = flow_jets_tp(model, y, eta0, t0, sh4)?;
    let xj = [
        Jet::variable(sh4, 0, TP::constant(c64(x_base[0], 0.0))),
        Jet::variable(sh4, 1, TP::constant(c64(x_base[1], 0.0))),
    ];
    let ej = [
        Jet::variable(sh4, 2, TP::constant(c64(eta0[0], 0.0))),
        Jet::variable(sh4, 3, TP::constant(c64(eta0[1], 0.0))),
    ];
    // h(y, eta) as a jet in eta
    let giy = model.metric_at(y)?.g_inv;
    let h_jet = ej[0]
        .mul(&ej[0])
        .scale(giy[0][0])
        .add(&ej[0].mul(&ej[1]).scale(giy[0][1] + giy[1][0]))
        .add(&ej[1].mul(&ej[1]).scale(giy[1][1]))
        .sqrt()?;

    let (re_phi, dist2) = match model.kind {
        ModelKind::Sphere2 { radius } => {
            let p = model.sphere_embed_unit(radius, &xs);
            let q = model.sphere_embed_unit(radius, &xj);
            let c = dot3_jets(&p, &q, false);
            let u = c.neg().add(&c.lift(1.0));
            let u0 = u.value().re;
            let theta0 = (1.0 - u0).clamp(-1.0, 1.0).acos();
            if theta0 >= 0.995 * PI {
                return Err(WfError::OutsideGeodesicNeighbourhood);
            }
            let dist2 = u.apply(&scalar::tower_acos_sq)?.scale(radius * radius);
            let f = u.apply(&scalar::tower_acos_sq_prime)?.scale(0.5);
            // W = R f (Q - c P), tangent at x*
            let mut wv: [Jet<TP>; 3] = [u.lift(0.0), u.lift(0.0), u.lift(0.0)];
            for i in 0..3 {
                wv[i] = q[i].sub(&c.mul(&p[i])).mul(&f).scale(radius);
            }
            let re = pair_with_momentum(model, radius, false, &xs, &xis, &wv);
            (re, dist2)
        }
        ModelKind::Hyperbolic2 { scale } => {
            let p = model.hyper_embed_unit(scale, &xs);
            let q = model.hyper_embed_unit(scale, &xj);
            let c = dot3_jets(&p, &q, true).neg();
            let u = c.add(&c.lift(-1.0));
            let dist2 = u.apply(&scalar::tower_acosh_sq)?.scale(scale * scale);
            let f = u.apply(&scalar::tower_acosh_sq_prime)?.scale(0.5);
            let mut wv: [Jet<TP>; 3] = [u.lift(0.0), u.lift(0.0), u.lift(0.0)];
            for i in 0..3 {
                wv[i] = q[i].sub(&c.mul(&p[i])).mul(&f).scale(scale);
            }
            let re = pair_with_momentum(model, scale, true, &xs, &xis, &wv);
            (re, dist2)
        }
        ModelKind::FlatTorus2 { lx, ly } => {
            let x0s = [xs[0].value().re, xs[1].value().re];
            let raw = [x_base[0] - x0s[0], x_base[1] - x0s[1]];
            let wrapped = [wrap_diff(raw[0], lx), wrap_diff(raw[1], ly)];
            let rinj = 0.5 * lx.min(ly);
            let dist0 = (wrapped[0] * wrapped[0] + wrapped[1] * wrapped[1]).sqrt();
            if dist0 >= 0.999 * rinj {
                return Err(WfError::OutsideGeodesicNeighbourhood);
            }
            let d = [
                xj[0].sub(&xs[0]).add(&xj[0].lift(wrapped[0] - raw[0])),
                xj[1].sub(&xs[1]).add(&xj[1].lift(wrapped[1] - raw[1])),
            ];
            let re = ej[0].mul(&d[0]).add(&ej[1].mul(&d[1]));
            let dist2 = d[0].mul(&d[0]).add(&d[1].mul(&d[1]));
            (re, dist2)
        }
        ModelKind::Conformal { .. } => {
            return Err(WfError::ModelLoad(
                "phase jets are implemented for the built-in models".into(),
            ));
        }
    };
    let phi = re_phi.add(
        &h_jet
            .mul(&dist2)
            .mul_coeff(&TP::constant(c64(0.0, 0.5 * eps))),
    );
    Ok((phi, xs, xis))
}

fn dot3_jets(a: &[Jet<TP>; 3], b: &[Jet<TP>; 3], minkowski: bool) -> Jet<TP> {
    let mut s = a[0].mul(&b[0]).add(&a[1].mul(&b[1]));
    let z = a[2].mul(&b[2]);
    s = if minkowski { s.sub(&z) } else { s.add(&z) };
    s
}

/// <xi*, v> where v is the chart pullback of the ambient tangent W at x*.
fn pair_with_momentum(
    model: &MetricModel,
    r: f64,
    minkowski: bool,
    xs: &[Jet<TP>; 2],
    xis: &[Jet<TP>; 2],
    w: &[Jet<TP>; 3],
) -> Jet<TP> {
    let jac = if minkowski {
        model.hyper_embed_jac(r, xs)
    } else {
        model.sphere_embed_jac(r, xs)
    };
    let gi = model.cometric_generic(xs);
    let mut jt: [Jet<TP>; 2] = [w[0].lift(0.0), w[0].lift(0.0)];
    for a in 0..2 {
        let z = jac[a][2].mul(&w[2]);
        let mut s = jac[a][0].mul(&w[0]).add(&jac[a][1].mul(&w[1]));
        s = if minkowski { s.sub(&z) } else { s.add(&z) };
        jt[a] = s.scale(r);
    }
    let v = [
        gi[0][0].mul(&jt[0]).add(&gi[0][1].mul(&jt[1])),
        gi[1][0].mul(&jt[0]).add(&gi[1][1].mul(&jt[1])),
    ];
    xis[0].mul(&v[0]).add(&xis[1].mul(&v[1]))
}

/// phi_{x eta} as a 2x2 matrix of jets (valid order drops by two).
pub(crate) fn phi_xeta_jets(phi: &Jet<TP>) -> [[Jet<TP>; 2]; 2] {
    let d0 = phi.derivative(0);
    let d1 = phi.derivative(1);
    [
        [d0.derivative(2), d0.derivative(3)],
        [d1.derivative(2), d1.derivative(3)],
    ]
}

impl PhaseJets {
    pub fn new(
        model: &MetricModel,
        y: Pt,
        eta0: Cot,
        eps: f64,
        t0: f64,
        order: usize,
        tracker: &mut BranchTracker,
    ) -> Result<PhaseJets> {
        let sh4 = shape(4, order);
        let state = flow::flow_state(model, y, eta0, t0)?;
        let (phi, xs, xis) = phi_jet_at(model, t0, state.x_star, y, eta0, eps, &sh4)?;
        let h = flow::hamiltonian(model, y, eta0)?;
        let rho_y = model.rho(y)?;
        // weight jet on the tracked branch
        let pm = phi_xeta_jets(&phi);
        let det = pm[0][0]
            .mul(&pm[1][1])
            .sub(&pm[0][1].mul(&pm[1][0]));
        let det2 = det.mul(&det);
        let det2_0 = det2.value();
        let arg_det = tracker.arg_at(model, t0)?;
        let branch_arg = 2.0 * arg_det;
        // reference fourth root of det2_0 consistent with the branch
        let r0 = det2_0.norm().powf(0.25) * c64(0.0, branch_arg / 4.0).exp();
        let root = det2.root4_ref(r0)?;
        let gx = model.metric_generic(&[
            Jet::variable(&sh4, 0, TP::constant(c64(state.x_star[0], 0.0))),
            Jet::variable(&sh4, 1, TP::constant(c64(state.x_star[1], 0.0))),
        ]);
        let detg = gx[0][0].mul(&gx[1][1]).sub(&gx[0][1].mul(&gx[1][0]));
        let rho_x = detg.sqrt()?;
        let w = root
            .mul(&rho_x.sqrt()?.recip()?)
            .scale(1.0 / rho_y.sqrt());
        Ok(PhaseJets {
            sh: sh4,
            t: t0,
            eps,
            h,
            rho_y,
            state,
            x_flow: xs,
            xi_flow: xis,
            phi,
            w,
            det2_0,
            branch_arg,
        })
    }
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

/// Evaluate phi and its first derivatives (plus the full order-`order` jet).
pub fn phase_eval_with_order(
    model: &MetricModel,
    t: f64,
    x: Pt,
    y: Pt,
    eta: Cot,
    eps: f64,
    order: usize,
) -> Result<PhaseEval> {
    let sh4 = shape(4, order.max(2));
    let (phi, _, _) = phi_jet_at(model, t, x, y, eta, eps, &sh4)?;
    let tp = phi.constant_coeff();
    let mut d_x = [C64::ZERO; 2];
    let mut d_eta = [C64::ZERO; 2];
    let mut dd = [[C64::ZERO; 2]; 2];
    for a in 0..2 {
        let mut e = [0usize; 4];
        e[a] = 1;
        d_x[a] = phi.coeff(&e).unwrap().value();
        let mut f = [0usize; 4];
        f[2 + a] = 1;
        d_eta[a] = phi.coeff(&f).unwrap().value();
        for b in 0..2 {
            let mut m = [0usize; 4];
            m[a] = 1;
            m[2 + b] += 1;
            dd[a][b] = phi.coeff(&m).unwrap().value();
        }
    }
    Ok(PhaseEval {
        value: tp.value(),
        d_t: tp.d1(),
        d_x,
        d_eta,
        d_x_d_eta: dd,
        epsilon: eps,
        jet: phi,
    })
}

pub fn phase_eval(
    model: &MetricModel,
    t: f64,
    x: Pt,
    y: Pt,
    eta: Cot,
    eps: f64,
) -> Result<PhaseEval> {
    phase_eval_with_order(model, t, x, y, eta, eps, 2)
}

/// phi_{x eta} along the flow from the variational data (closed formula):
/// xi*_eta - Gamma(x*) xi* x*_eta - i eps h g(x*) x*_eta.
pub fn phi_x_eta_on_flow(
    model: &MetricModel,
    state: &FlowState,
    eps: f64,
) -> Result<[[C64; 2]; 2]> {
    let gam = model.christoffel_at(state.x_star)?;
    let g = model.metric_at(state.x_star)?.g;
    let h = flow::hamiltonian(model, state.x_star, state.xi_star)?;
    let mut out = [[C64::ZERO; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let mut v = c64(state.dxi_deta[a][b], 0.0);
            for (mu, gam_mu) in gam.iter().enumerate() {
                for nu in 0..2 {
                    v -= gam_mu[a][nu] * state.xi_star[mu] * state.dx_deta[nu][b];
                }
            }
            for nu in 0..2 {
                v -= c64(0.0, eps * h) * g[a][nu] * state.dx_deta[nu][b];
            }
            out[a][b] = v;
        }
    }
    Ok(out)
}

/// The chart-invariant scalar (rho(y)/rho(x*)) det phi_{x eta} |_{x = x*}.
pub fn weight_scalar_part(model: &MetricModel, y: Pt, state: &FlowState, eps: f64) -> Result<C64> {
    let m = phi_x_eta_on_flow(model, state, eps)?;
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let ratio = model.rho(y)? / model.rho(state.x_star)?;
    Ok(det * ratio)
}

// ---------------------------------------------------------------------------
// Branch tracking
// ---------------------------------------------------------------------------

/// Continuously tracked argument of det phi_{x eta}|_{x=x*} in t, anchored at
/// arg = 0 for t = 0. The squared determinant's branch is twice this. The
/// tracked quantity is the chart-invariant scalar part, whose modulus stays
/// of order one.
pub struct BranchTracker {
    pub y: Pt,
    pub eta: Cot,
    pub eps: f64,
    /// (t, unwrapped arg of the scalar part)
    samples: Vec<(f64, f64)>,
}

impl BranchTracker {
    pub fn new(y: Pt, eta: Cot, eps: f64) -> Self {
        BranchTracker {
            y,
            eta,
            eps,
            samples: vec![(0.0, 0.0)],
        }
    }

    fn scalar(&self, model: &MetricModel, t: f64) -> Result<C64> {
        let state = flow::flow_state(model, self.y, self.eta, t)?;
        weight_scalar_part(model, self.y, &state, self.eps)
    }

    /// Unwrapped arg of det phi_{x eta} at time t (branch of the square root).
    pub fn arg_at(&mut self, model: &MetricModel, t: f64) -> Result<f64> {
        if let Some(&(_, a)) = self
            .samples
            .iter()
            .find(|&&(ts, _)| (ts - t).abs() < 1e-13)
        {
            return Ok(a);
        }
        // nearest anchored sample
        let (mut t0, mut a0) = *self
            .samples
            .iter()
            .min_by(|a, b| {
                ((a.0 - t).abs())
                    .partial_cmp(&(b.0 - t).abs())
                    .unwrap()
            })
            .unwrap();
        let mut s0 = self.scalar(model, t0)?;
        let mut step = 0.05f64 * (t - t0).signum();
        if step == 0.0 {
            return Ok(a0);
        }
        while (t0 - t).abs() > 1e-14 {
            if (t0 + step - t) * step.signum() > 0.0 {
                step = t - t0;
            }
            let t1 = t0 + step;
            let s1 = self.scalar(model, t1)?;
            if s1.norm() < 1e-9 * s0.norm().max(1e-3) {
                return Err(WfError::BranchDegenerate(t1));
            }
            let da = (s1 / s0).arg();
            if da.abs() >= std::f64::consts::FRAC_PI_2 {
                step *= 0.5;
                if step.abs() < 1e-10 {
                    return Err(WfError::BranchDegenerate(t1));
                }
                continue;
            }
            a0 += da;
            t0 = t1;
            s0 = s1;
            self.samples.push((t0, a0));
            step = 0.05f64 * (t - t0).signum();
            if step == 0.0 {
                break;
            }
        }
        Ok(a0)
    }
}

/// Weight values along a trajectory, branch-tracked in t.
pub fn weight_eval(
    model: &MetricModel,
    y: Pt,
    eta: Cot,
    eps: f64,
    t_grid: &[f64],
) -> Result<Vec<WeightEval>> {
    let mut tracker = BranchTracker::new(y, eta, eps);
    let rho_y = model.rho(y)?;
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let state = flow::flow_state(model, y, eta, t)?;
        let m = phi_x_eta_on_flow(model, &state, eps)?;
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let det2 = det * det;
        let arg_scalar = tracker.arg_at(model, t)?;
        let branch_arg = 2.0 * arg_scalar;
        let rho_x = model.rho(state.x_star)?;
        let value = det2.norm().powf(0.25) * c64(0.0, branch_arg / 4.0).exp()
            / (rho_x * rho_y).sqrt();
        out.push(WeightEval {
            t,
            value,
            branch_arg,
            det2,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Cut-off
// ---------------------------------------------------------------------------

fn smoothstep(tau: f64) -> f64 {
    if tau <= 0.0 {
        0.0
    } else if tau >= 1.0 {
        1.0
    } else {
        let e = (-1.0 / tau).exp();
        let f = (-1.0 / (1.0 - tau)).exp();
        e / (e + f)
    }
}

/// chi(t, x; y, eta): radial bump in h(y, eta) (0 below 1/2, 1 above 1) times
/// a spatial bump in dist(x, x*)/r_inj (1 below 0.5, 0 above 0.8).
pub fn cutoff_chi(model: &MetricModel, t: f64, x: Pt, y: Pt, eta: Cot) -> f64 {
    let h = match flow::hamiltonian(model, y, eta) {
        Ok(h) => h,
        Err(_) => return 0.0,
    };
    let radial = smoothstep((h - 0.5) / 0.5);
    if radial == 0.0 {
        return 0.0;
    }
    let state = match flow::flow_state(model, y, eta, t) {
        Ok(s) => s,
        Err(_) => return 0.0,
    };
    let rinj = model.injectivity_radius(state.x_star);
    let spatial = if rinj.is_infinite() {
        1.0
    } else {
        match model.geodesic_distance(x, state.x_star) {
            Ok(d) => 1.0 - smoothstep((d / rinj - 0.5) / 0.3),
            Err(_) => 0.0,
        }
    };
    radial * spatial
}

// ---------------------------------------------------------------------------
// Chart normalisation (sphere): rotate the configuration so the trajectory
// runs along the equator of the stereographic chart, keeping every flow
// point at chart radius 2R. All symbol-level quantities are invariant under
// this isometry.
// ---------------------------------------------------------------------------

pub fn normalized_config(model: &MetricModel, y: Pt, eta: Cot) -> Result<(Pt, Cot)> {
    let radius = match model.kind {
        ModelKind::Sphere2 { radius } => radius,
        _ => return Ok((y, eta)),
    };
    let h = flow::hamiltonian(model, y, eta)?;
    let gi = model.metric_at(y)?.g_inv;
    let v = [
        (gi[0][0] * eta[0] + gi[0][1] * eta[1]) / h,
        (gi[1][0] * eta[0] + gi[1][1] * eta[1]) / h,
    ];
    let yl = [y[0], y[1]];
    let p = model.sphere_embed_unit(radius, &yl);
    let jac = model.sphere_embed_jac(radius, &yl);
    let mut u = [0.0; 3];
    for i in 0..3 {
        u[i] = (jac[0][i] * v[0] + jac[1][i] * v[1]) * radius;
    }
    let n = cross(&p, &u);
    if n[2].abs() > 0.9999 {
        return Ok((y, eta)); // already equatorial
    }
    // circle point closest to the equator, then tilt the plane flat
    let s0 = (-p[2]).atan2(u[2]);
    let a = [
        s0.cos() * p[0] + s0.sin() * u[0],
        s0.cos() * p[1] + s0.sin() * u[1],
        s0.cos() * p[2] + s0.sin() * u[2],
    ];
    let w = cross(&a, &n);
    let beta = w[2].atan2(n[2]);
    let rot = |x: &[f64; 3]| -> [f64; 3] {
        let axn = cross(&a, x);
        let ax = a[0] * x[0] + a[1] * x[1] + a[2] * x[2];
        let (cb, sb) = (beta.cos(), beta.sin());
        [
            x[0] * cb + axn[0] * sb + a[0] * ax * (1.0 - cb),
            x[1] * cb + axn[1] * sb + a[1] * ax * (1.0 - cb),
            x[2] * cb + axn[2] * sb + a[2] * ax * (1.0 - cb),
        ]
    };
    let p2 = rot(&p);
    let u2 = rot(&u);
    let denom = 1.0 - p2[2];
    let y2 = [
        2.0 * radius * p2[0] / denom,
        2.0 * radius * p2[1] / denom,
    ];
    let j2 = model.sphere_embed_jac(radius, &[y2[0], y2[1]]);
    let eta2 = [
        h * radius * (j2[0][0] * u2[0] + j2[0][1] * u2[1] + j2[0][2] * u2[2]),
        h * radius * (j2[1][0] * u2[0] + j2[1][1] * u2[1] + j2[1][2] * u2[2]),
    ];
    Ok((y2, eta2))
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Laplace-Beltrami of a jet at its base point (x-variables 0, 1).
pub(crate) fn laplacian_at_base(model: &MetricModel, x: Pt, j: &Jet<TP>) -> Result<C64> {
    let md = model.metric_at(x)?;
    // Delta f = g^{mn} f_{,mn} + rho^{-1} (rho g^{mn})_{,m} f_{,n}
    let sh2 = shape(2, 1);
    let vars = [
        Jet::variable(&sh2, 0, C64::new(x[0], 0.0)),
        Jet::variable(&sh2, 1, C64::new(x[1], 0.0)),
    ];
    let gi = model.cometric_generic(&vars);
    let g = model.metric_generic(&vars);
    let det = g[0][0].mul(&g[1][1]).sub(&g[0][1].mul(&g[1][0]));
    let rho = det.sqrt()?;
    let mut acc = C64::ZERO;
    for m in 0..2 {
        for n in 0..2 {
            let mut e = [0usize; 4];
            e[m] += 1;
            e[n] += 1;
            let fmn = crate::jets::extract_derivative(j, &e)?;
            acc += md.g_inv[m][n] * fmn;
        }
    }
    for n in 0..2 {
        let mut coef = C64::ZERO;
        for m in 0..2 {
            let term = rho.mul(&gi[m][n]).derivative(m).value();
            coef += term;
        }
        coef /= c64(md.rho, 0.0);
        let mut e = [0usize; 4];
        e[n] = 1;
        acc += coef * crate::jets::extract_derivative(j, &e)?;
    }
    Ok(acc)
}
