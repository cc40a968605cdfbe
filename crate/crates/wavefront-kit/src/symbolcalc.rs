//! The full-symbol algorithm.
//!
//! Applying the wave operator to the oscillatory ansatz produces an amplitude
//! that splits into homogeneous components b2, b1, b0. Amplitude-to-symbol
//! operators S_0, S_{-1}, S_{-2} (built from L_alpha = (phi_x_eta)^{-1} d_x
//! and momentum derivatives) reduce x-dependent amplitudes to symbols, and
//! the second transport equation integrates to the degree minus-one symbol
//! component
//!
//!   a_{-1}(t) = -(i/2h) int_0^t [S_{-2} b2 + S_{-1} b1 + S_0 b0] dtau.
//!
//! The same machinery yields the identity-operator symbols at t = 0 by a
//! normal-coordinate series procedure, the small-time law, and the first
//! transport equation residual used as an end-to-end consistency check.

use crate::error::{Result, WfError};
use crate::flow::{self, FlowState};
use crate::geometry::{Cot, MetricModel, Pt};
use crate::jets::{Jet, Shape, extract_derivative, shape};
use crate::phase::{self, BranchTracker, PhaseJets};
use crate::quad;
use crate::scalar::{self, C64, c64};

use std::sync::Arc;

const PHASE_ORDER: usize = 6;

/// An x-dependent amplitude known through its (x, eta)-jet about (x*, eta).
#[derive(Clone, Debug)]
pub struct AmplitudeField {
    pub jet: Jet<C64>,
    pub homogeneity: i32,
}

impl AmplitudeField {
    pub fn value(&self) -> C64 {
        self.jet.value()
    }
}

/// Phase data prepared for the amplitude-to-symbol operators at one
/// (t; y, eta; eps).
pub struct PhaseContext<'m> {
    pub model: &'m MetricModel,
    pub y: Pt,
    pub eta: Cot,
    pub eps: f64,
    pub t: f64,
    pub h: f64,
    pub state: FlowState,
    pub(crate) pj: PhaseJets,
    w0: Jet<C64>,
    w0_inv: Jet<C64>,
    phi0: Jet<C64>,
    phi_eta: [Jet<C64>; 2],
    phi_xeta_inv: [[Jet<C64>; 2]; 2],
    phi_etaeta: [[Jet<C64>; 2]; 2],
}

impl<'m> PhaseContext<'m> {
    pub fn new(model: &'m MetricModel, y: Pt, eta: Cot, eps: f64, t: f64) -> Result<Self> {
        let mut tracker = BranchTracker::new(y, eta, eps);
        Self::with_tracker(model, y, eta, eps, t, &mut tracker)
    }

    pub fn with_order(
        model: &'m MetricModel,
        y: Pt,
        eta: Cot,
        eps: f64,
        t: f64,
        order: usize,
    ) -> Result<Self> {
        let mut tracker = BranchTracker::new(y, eta, eps);
        Self::build(model, y, eta, eps, t, order, &mut tracker)
    }

    pub fn with_tracker(
        model: &'m MetricModel,
        y: Pt,
        eta: Cot,
        eps: f64,
        t: f64,
        tracker: &mut BranchTracker,
    ) -> Result<Self> {
        Self::build(model, y, eta, eps, t, PHASE_ORDER, tracker)
    }

    fn build(
        model: &'m MetricModel,
        y: Pt,
        eta: Cot,
        eps: f64,
        t: f64,
        order: usize,
        tracker: &mut BranchTracker,
    ) -> Result<Self> {
        let pj = PhaseJets::new(model, y, eta, eps, t, order, tracker)?;
        let phi0 = pj.phi.t_value();
        let w0 = pj.w.t_value();
        let w0_inv = w0.recip()?;
        let phi_eta = [phi0.derivative(2), phi0.derivative(3)];
        let pm = [
            [
                phi0.derivative(0).derivative(2),
                phi0.derivative(0).derivative(3),
            ],
            [
                phi0.derivative(1).derivative(2),
                phi0.derivative(1).derivative(3),
            ],
        ];
        let det = pm[0][0].mul(&pm[1][1]).sub(&pm[0][1].mul(&pm[1][0]));
        if det.value().norm() < 1e-12 {
            return Err(WfError::SingularPhaseHessian);
        }
        let dinv = det.recip()?;
        let phi_xeta_inv = [
            [pm[1][1].mul(&dinv), pm[0][1].neg().mul(&dinv)],
            [pm[1][0].neg().mul(&dinv), pm[0][0].mul(&dinv)],
        ];
        let phi_etaeta = [
            [phi_eta[0].derivative(2), phi_eta[0].derivative(3)],
            [phi_eta[1].derivative(2), phi_eta[1].derivative(3)],
        ];
        Ok(PhaseContext {
            model,
            y,
            eta,
            eps,
            t,
            h: pj.h,
            state: pj.state.clone(),
            pj,
            w0,
            w0_inv,
            phi0,
            phi_eta,
            phi_xeta_inv,
            phi_etaeta,
        })
    }

    pub fn shape(&self) -> &Arc<Shape> {
        &self.pj.sh
    }

    /// L_alpha a = [(phi_x_eta)^{-1}]_alpha^beta d a / d x^beta.
    pub fn l_apply(&self, a: &Jet<C64>, alpha: usize) -> Jet<C64> {
        let d0 = a.derivative(0);
        let d1 = a.derivative(1);
        self.phi_xeta_inv[alpha][0]
            .mul(&d0)
            .add(&self.phi_xeta_inv[alpha][1].mul(&d1))
    }

    fn l_multi(&self, a: &Jet<C64>, i: usize, j: usize) -> Jet<C64> {
        let mut out = a.clone();
        for _ in 0..i {
            out = self.l_apply(&out, 0);
        }
        for _ in 0..j {
            out = self.l_apply(&out, 1);
        }
        out
    }

    /// (-phi_eta)^(i,j)
    fn neg_phi_eta_pow(&self, i: usize, j: usize) -> Jet<C64> {
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        let mut out = Jet::constant(&self.pj.sh, c64(sign, 0.0));
        for _ in 0..i {
            out = out.mul(&self.phi_eta[0]);
        }
        for _ in 0..j {
            out = out.mul(&self.phi_eta[1]);
        }
        out
    }

    /// One application of the bracket operator from the reduction formula:
    /// i w^{-1} d/d eta_beta [ w (1 + sum_{1<=|al|<=cap} ((-phi_eta)^al /
    /// (al! (|al|+1))) L_al) L_beta a ], summed over beta.
    fn bracket(&self, a: &Jet<C64>, cap: usize) -> Jet<C64> {
        let mut total = Jet::zero(&self.pj.sh);
        for beta in 0..2 {
            let lb = self.l_apply(a, beta);
            let mut inner = lb.clone();
            for i in 0..=cap {
                for j in 0..=(cap - i) {
                    if i + j == 0 {
                        continue;
                    }
                    let coef = 1.0 / (fact(i) * fact(j) * (i + j + 1) as f64);
                    // phi_eta vanishes on the flow, which restores the
                    // exactness the iterated L derivatives consumed
                    let term = self
                        .neg_phi_eta_pow(i, j)
                        .mul_vanishing(i + j, &self.l_multi(&lb, i, j))
                        .scale(coef);
                    inner = inner.add(&term);
                }
            }
            total = total.add(&self.w0.mul(&inner).derivative(2 + beta));
        }
        self.w0_inv.mul(&total).mul_coeff(&C64::I)
    }

    /// B_{-1} g = i w^{-1} d/d eta_al (w L_al g)
    ///           - (i/2) phi_{eta_al eta_be} L_al L_be g.
    fn b_minus1(&self, g: &Jet<C64>) -> Jet<C64> {
        let mut t1 = Jet::zero(&self.pj.sh);
        for al in 0..2 {
            t1 = t1.add(&self.w0.mul(&self.l_apply(g, al)).derivative(2 + al));
        }
        let mut out = self.w0_inv.mul(&t1).mul_coeff(&C64::I);
        for al in 0..2 {
            for be in 0..2 {
                let lab = self.l_apply(&self.l_apply(g, al), be);
                out = out.sub(&self.phi_etaeta[al][be].mul(&lab).mul_coeff(&c64(0.0, 0.5)));
            }
        }
        out
    }
}

fn fact(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product::<f64>().max(1.0)
}

/// S_{-k} via the simplified representations (k = 1, 2) or restriction (k=0).
pub fn s_op(ctx: &PhaseContext, k: usize, amp: &AmplitudeField) -> Result<C64> {
    match k {
        0 => Ok(amp.jet.value()),
        1 => Ok(ctx.b_minus1(&amp.jet).value()),
        2 => Ok(ctx.b_minus1(&ctx.bracket(&amp.jet, 3)).value()),
        _ => Err(WfError::UnsupportedOrder(k, 2)),
    }
}

/// S_{-k} by iterating the raw bracket operator k times (cross-check path).
pub fn s_op_raw(ctx: &PhaseContext, k: usize, amp: &AmplitudeField) -> Result<C64> {
    if k > 2 {
        return Err(WfError::UnsupportedOrder(k, 2));
    }
    let mut a = amp.jet.clone();
    for _ in 0..k {
        a = ctx.bracket(&a, 2 * k - 1);
    }
    Ok(a.value())
}

/// Laplace-Beltrami applied to an (x, eta)-jet, as a jet.
fn laplacian_jet(model: &MetricModel, sh: &Arc<Shape>, x0: Pt, f: &Jet<C64>) -> Result<Jet<C64>> {
    let xv = [
        Jet::variable(sh, 0, c64(x0[0], 0.0)),
        Jet::variable(sh, 1, c64(x0[1], 0.0)),
    ];
    let gi = model.cometric_generic(&xv);
    let g = model.metric_generic(&xv);
    let det = g[0][0].mul(&g[1][1]).sub(&g[0][1].mul(&g[1][0]));
    let rho = det.sqrt()?;
    let rho_inv = rho.recip()?;
    let mut out = Jet::zero(sh);
    for m in 0..2 {
        for n in 0..2 {
            out = out.add(&gi[m][n].mul(&f.derivative(m).derivative(n)));
        }
    }
    for n in 0..2 {
        let mut coef = Jet::zero(sh);
        for m in 0..2 {
            coef = coef.add(&rho.mul(&gi[m][n]).derivative(m));
        }
        out = out.add(&coef.mul(&rho_inv).mul(&f.derivative(n)));
    }
    Ok(out)
}

/// The wave-operator amplitude components at (t; y, eta; eps), as jets about
/// (x*(t), eta). b2 = -phi_t^2 + |grad phi|^2, b1 the first-order part, b0 =
/// w^{-1}(w_tt - Delta w); homogeneity degrees 2, 1, 0.
pub fn b_components(
    ctx: &PhaseContext,
) -> Result<(AmplitudeField, AmplitudeField, AmplitudeField)> {
    let model = ctx.model;
    let sh = &ctx.pj.sh;
    let x0 = ctx.state.x_star;
    let phi = &ctx.pj.phi;
    let phi0 = &ctx.phi0;
    let phi_t = phi.t_d1();
    let phi_tt = phi.t_d2();
    let xv = [
        Jet::variable(sh, 0, c64(x0[0], 0.0)),
        Jet::variable(sh, 1, c64(x0[1], 0.0)),
    ];
    let gi = model.cometric_generic(&xv);
    let grad = [phi0.derivative(0), phi0.derivative(1)];
    let mut b2 = phi_t.mul(&phi_t).neg();
    for a in 0..2 {
        for b in 0..2 {
            b2 = b2.add(&gi[a][b].mul(&grad[a]).mul(&grad[b]));
        }
    }
    // b1 = i [phi_tt - Delta phi + 2 (ln w)_t phi_t - 2 <grad ln w, grad phi>]
    let lnw = ctx.pj.w.apply(&scalar::tower_ln)?;
    let lnw_t = lnw.t_d1();
    let lnw0 = lnw.t_value();
    let lap_phi = laplacian_jet(model, sh, x0, phi0)?;
    let mut b1 = phi_tt.sub(&lap_phi).add(&lnw_t.mul(&phi_t).scale(2.0));
    for a in 0..2 {
        for b in 0..2 {
            b1 = b1.sub(&gi[a][b].mul(&lnw0.derivative(a)).mul(&grad[b]).scale(2.0));
        }
    }
    let b1 = b1.mul_coeff(&C64::I);
    // b0 = w^{-1} (w_tt - Delta w)
    let w0 = ctx.pj.w.t_value();
    let w_tt = ctx.pj.w.t_d2();
    let b0 = ctx.w0_inv.mul(&w_tt.sub(&laplacian_jet(model, sh, x0, &w0)?));
    Ok((
        AmplitudeField {
            jet: b2,
            homogeneity: 2,
        },
        AmplitudeField {
            jet: b1,
            homogeneity: 1,
        },
        AmplitudeField {
            jet: b0,
            homogeneity: 0,
        },
    ))
}

/// S_{-2} b2 + S_{-1} b1 + S_0 b0 at one time.
pub fn transport_sum(ctx: &PhaseContext) -> Result<C64> {
    let (b2, b1, b0) = b_components(ctx)?;
    Ok(s_op(ctx, 2, &b2)? + s_op(ctx, 1, &b1)? + s_op(ctx, 0, &b0)?)
}

/// The three transport terms separately (for tests and reporting).
pub fn transport_terms(
    model: &MetricModel,
    y: Pt,
    eta: Cot,
    eps: f64,
    t: f64,
) -> Result<(C64, C64, C64)> {
    let (y2, e2) = phase::normalized_config(model, y, eta)?;
    let ctx = PhaseContext::new(model, y2, e2, eps, t)?;
    let (b2, b1, b0) = b_components(&ctx)?;
    Ok((
        s_op(&ctx, 2, &b2)?,
        s_op(&ctx, 1, &b1)?,
        s_op(&ctx, 0, &b0)?,
    ))
}

/// The degree minus-one symbol component by time quadrature, with `b0_shift`
/// added to b0 (0 for the plain wave operator, 1/4 for the shifted one).
pub fn subprincipal_symbol_shifted(
    model: &MetricModel,
    y: Pt,
    eta: Cot,
    eps: f64,
    t: f64,
    quad_tol: f64,
    b0_shift: f64,
) -> Result<C64> {
    let grid = [t];
    Ok(subprincipal_on_grid(model, y, eta, eps, &grid, quad_tol, b0_shift)?[0])
}

pub fn subprincipal_symbol(
    model: &MetricModel,
    y: Pt,
    eta: Cot,
    eps: f64,
    t: f64,
    quad_tol: f64,
) -> Result<C64> {
    subprincipal_symbol_shifted(model, y, eta, eps, t, quad_tol, 0.0)
}

/// Subprincipal symbol on an ascending time grid sharing one branch tracker
/// and one cumulative quadrature pass.
pub fn subprincipal_on_grid(
    model: &MetricModel,
    y: Pt,
    eta: Cot,
    eps: f64,
    ts: &[f64],
    quad_tol: f64,
    b0_shift: f64,
) -> Result<Vec<C64>> {
    let (y2, e2) = phase::normalized_config(model, y, eta)?;
    let h = flow::hamiltonian(model, y, eta)?;
    let mut tracker = BranchTracker::new(y2, e2, eps);
    let integrand = |tau: f64| -> Result<C64> {
        let ctx = PhaseContext::with_tracker(model, y2, e2, eps, tau, &mut tracker)?;
        Ok(transport_sum(&ctx)? + c64(b0_shift, 0.0))
    };
    let sums = quad::cumulative(integrand, ts, quad_tol)?;
    Ok(sums.into_iter().map(|s| s * c64(0.0, -0.5 / h)).collect())
}

/// Linear-in-t coefficient of the eps = 0 subprincipal symbol, extracted by
/// Richardson extrapolation of a_{-1}(t)/t at t -> 0.
pub fn small_time_coefficient(model: &MetricModel, y: Pt, eta: Cot) -> Result<C64> {
    let t1 = 0.02;
    let vals = subprincipal_on_grid(model, y, eta, 0.0, &[t1 / 2.0, t1], 1e-10, 0.0)?;
    let c_half = vals[0] / (t1 / 2.0);
    let c_full = vals[1] / t1;
    Ok(c_half * 2.0 - c_full)
}

/// Left minus right of the first transport equation at (t; y, eta; eps).
pub fn fte_residual(model: &MetricModel, y: Pt, eta: Cot, eps: f64, t: f64) -> Result<C64> {
    let (y2, e2) = phase::normalized_config(model, y, eta)?;
    let ctx = PhaseContext::new(model, y2, e2, eps, t)?;
    let x0 = ctx.state.x_star;
    // LHS: (phi_tt - Delta phi)|_{x = x*}
    let phi_tt0 = ctx.pj.phi.constant_coeff().d2();
    let lap_phi0 = laplacian_jet(ctx.model, &ctx.pj.sh, x0, &ctx.phi0)?.value();
    let lhs = phi_tt0 - lap_phi0;
    // 2 h d(ln w*)/dt with w* = w(t, x*(t))
    let md = ctx.model.metric_at(x0)?;
    let xdot = [
        (md.g_inv[0][0] * ctx.state.xi_star[0] + md.g_inv[0][1] * ctx.state.xi_star[1]) / ctx.h,
        (md.g_inv[1][0] * ctx.state.xi_star[0] + md.g_inv[1][1] * ctx.state.xi_star[1]) / ctx.h,
    ];
    let w0v = ctx.w0.value();
    let w_t0 = ctx.pj.w.constant_coeff().d1();
    let mut dw = w_t0;
    for g in 0..2 {
        let mut e = [0usize; 4];
        e[g] = 1;
        dw += extract_derivative(&ctx.w0, &e)? * xdot[g];
    }
    let dlnw = dw / w0v;
    // Hessian term: (1/2) x*_eta^gamma_al (phi_xeta^{-1})_al^be (b2)_{x^be x^gam}
    let (b2, _, _) = b_components(&ctx)?;
    let mut hess = [[C64::ZERO; 2]; 2];
    for (be, row) in hess.iter_mut().enumerate() {
        for (gm, v) in row.iter_mut().enumerate() {
            let mut e = [0usize; 4];
            e[be] += 1;
            e[gm] += 1;
            *v = extract_derivative(&b2.jet, &e)?;
        }
    }
    let mut inv0 = [[C64::ZERO; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            inv0[a][b] = ctx.phi_xeta_inv[a][b].value();
        }
    }
    let mut third = C64::ZERO;
    for al in 0..2 {
        for be in 0..2 {
            for gm in 0..2 {
                third += c64(ctx.state.dx_deta[gm][al], 0.0) * inv0[al][be] * hess[be][gm];
            }
        }
    }
    Ok(lhs - c64(2.0 * ctx.h, 0.0) * dlnw - third * 0.5)
}

/// The propagator symbol truncated at depth one: a = 1 + a_{-1}.
pub struct SymbolSeries {
    pub model: MetricModel,
    pub y: Pt,
    pub eta: Cot,
    pub eps: f64,
}

impl SymbolSeries {
    /// Component of homogeneity degree -k at time t; None above the
    /// implemented depth (k = 2 and below are not constructed).
    pub fn component(&self, k: usize, t: f64) -> Result<Option<C64>> {
        match k {
            0 => Ok(Some(C64::ONE)),
            1 => Ok(Some(subprincipal_symbol(
                &self.model,
                self.y,
                self.eta,
                self.eps,
                t,
                1e-9,
            )?)),
            _ => Ok(None),
        }
    }
}

// ---------------------------------------------------------------------------
// Identity-operator symbols at t = 0 (normal-coordinate series procedure)
// ---------------------------------------------------------------------------

/// s_{-k}(y, eta; eps) for the geometry-adapted phase at t = 0, computed by
/// expanding e^{i phi} and sqrt(det phi_x_eta) in normal coordinates and
/// integrating by parts order by order (not by hard-coding the table).
/// Supported: k <= 10 for d = 2, k <= 2 for general d in 2..=6.
pub fn identity_symbol(d: usize, eps: f64, k: usize, h_val: f64) -> Result<C64> {
    if d < 2 || d > 6 || (d == 2 && k > 10) || (d > 2 && k > 2) {
        return Err(WfError::UnsupportedOrder(k, d));
    }
    let s = identity_symbol_table(d, eps, k, h_val)?;
    Ok(s[k])
}

fn identity_symbol_table(d: usize, eps: f64, kmax: usize, h: f64) -> Result<Vec<C64>> {
    // Each level is exactly homogeneous of degree (eps/h)^k, and at eps = h =
    // 1 with the base momentum on the rational circle every quantity in the
    // procedure is rational, so the table is computed once in exact fractions
    // and scaled.
    let table = exact::table(d, kmax);
    Ok(table
        .into_iter()
        .enumerate()
        .map(|(k, v)| c64(v * (eps / h).powi(k as i32), 0.0))
        .collect())
}

mod exact {
    //! Exact-fraction jets in the momentum increment: dense truncated
    //! polynomials about eta0 = (3/5, 4/5, 0, ...), where |eta0| = 1 keeps
    //! the radical-free binomial series of |eta|^q rational.

    use super::multi_indices;

    /// Reduced i128 fraction; panics on overflow, which the bounded orders
    /// (k <= 10, d <= 6) stay well clear of.
    #[derive(Clone, Copy, PartialEq, Debug)]
    pub struct Frac {
        n: i128,
        d: i128,
    }

    impl Frac {
        pub fn new(n: i128, d: i128) -> Self {
            assert!(d != 0);
            let g = gcd(n.unsigned_abs(), d.unsigned_abs()) as i128;
            let s = if d < 0 { -1 } else { 1 };
            Frac {
                n: s * n / g,
                d: s * d / g,
            }
        }
        pub const ZERO: Frac = Frac { n: 0, d: 1 };
        pub const ONE: Frac = Frac { n: 1, d: 1 };
        pub fn int(n: i128) -> Self {
            Frac { n, d: 1 }
        }
        pub fn add(self, o: Frac) -> Frac {
            Frac::new(self.n * o.d + o.n * self.d, self.d * o.d)
        }
        pub fn mul(self, o: Frac) -> Frac {
            Frac::new(self.n * o.n, self.d * o.d)
        }
        pub fn neg(self) -> Frac {
            Frac { n: -self.n, d: self.d }
        }
        pub fn to_f64(self) -> f64 {
            self.n as f64 / self.d as f64
        }
        pub fn is_zero(self) -> bool {
            self.n == 0
        }
    }

    fn gcd(mut a: u128, mut b: u128) -> u128 {
        if a == 0 {
            return b.max(1);
        }
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a.max(1)
    }

    /// Dense truncated polynomial in d increment variables, total degree <= order.
    struct QPoly {
        d: usize,
        order: usize,
        midx: Vec<Vec<usize>>,
        rank: std::collections::HashMap<Vec<usize>, usize>,
        c: Vec<Frac>,
    }

    impl QPoly {
        fn zero_like(&self) -> QPoly {
            QPoly {
                d: self.d,
                order: self.order,
                midx: self.midx.clone(),
                rank: self.rank.clone(),
                c: vec![Frac::ZERO; self.c.len()],
            }
        }
        fn new(d: usize, order: usize) -> QPoly {
            let mut midx = Vec::new();
            for deg in 0..=order {
                let mut level = multi_indices(d, deg);
                level.sort();
                midx.extend(level);
            }
            let rank = midx
                .iter()
                .cloned()
                .enumerate()
                .map(|(i, m)| (m, i))
                .collect();
            let c = vec![Frac::ZERO; midx.len()];
            QPoly {
                d,
                order,
                midx,
                rank,
                c,
            }
        }
        fn add_assign(&mut self, o: &QPoly) {
            for (a, b) in self.c.iter_mut().zip(&o.c) {
                *a = a.add(*b);
            }
        }
        fn scale(&self, s: Frac) -> QPoly {
            let mut out = self.zero_like();
            for (a, b) in out.c.iter_mut().zip(&self.c) {
                *a = b.mul(s);
            }
            out
        }
        fn mul(&self, o: &QPoly) -> QPoly {
            let mut out = self.zero_like();
            for (i, &ci) in self.c.iter().enumerate() {
                if ci.is_zero() {
                    continue;
                }
                let di: usize = self.midx[i].iter().sum();
                for (j, &cj) in o.c.iter().enumerate() {
                    if cj.is_zero() {
                        continue;
                    }
                    let dj: usize = o.midx[j].iter().sum();
                    if di + dj > self.order {
                        continue;
                    }
                    let sum: Vec<usize> = self.midx[i]
                        .iter()
                        .zip(&o.midx[j])
                        .map(|(a, b)| a + b)
                        .collect();
                    let k = self.rank[&sum];
                    out.c[k] = out.c[k].add(ci.mul(cj));
                }
            }
            out
        }
        fn coeff(&self, gamma: &[usize]) -> Frac {
            self.rank
                .get(gamma)
                .map(|&i| self.c[i])
                .unwrap_or(Frac::ZERO)
        }
    }

    /// Rational point on the unit (d-1)-sphere.
    fn base_direction(d: usize) -> Vec<Frac> {
        let mut eta = vec![Frac::ZERO; d];
        eta[0] = Frac::new(3, 5);
        eta[1] = Frac::new(4, 5);
        eta
    }

    /// eta_i = eta0_i + delta_i as a polynomial.
    fn eta_var(proto: &QPoly, i: usize, eta0: &[Frac]) -> QPoly {
        let mut p = proto.zero_like();
        p.c[0] = eta0[i];
        let mut e = vec![0usize; proto.d];
        e[i] = 1;
        let k = proto.rank[&e];
        p.c[k] = Frac::ONE;
        p
    }

    /// |eta|^q about |eta0| = 1 by the exact binomial series of (1 + u)^{q/2}.
    fn norm_pow(proto: &QPoly, ev: &[QPoly], q: i32) -> QPoly {
        let mut nrm2 = proto.zero_like();
        for e in ev {
            nrm2.add_assign(&e.mul(e));
        }
        // u = |eta|^2 - 1 is nilpotent in the truncation
        let mut u = nrm2;
        u.c[0] = u.c[0].add(Frac::ONE.neg());
        let order = proto.order;
        // Horner over binom(q/2, k), k = order..0
        let mut out = proto.zero_like();
        out.c[0] = binom_q2(q, order);
        for k in (0..order).rev() {
            out = out.mul(&u);
            out.c[0] = out.c[0].add(binom_q2(q, k));
        }
        out
    }

    /// binom(q/2, k) as an exact fraction.
    fn binom_q2(q: i32, k: usize) -> Frac {
        let mut c = Frac::ONE;
        for i in 0..k {
            // (q/2 - i) / (i + 1)
            c = c.mul(Frac::new(q as i128 - 2 * i as i128, 2 * (i as i128 + 1)));
        }
        c
    }

    fn fact(n: usize) -> Frac {
        Frac::int((1..=n as i128).product::<i128>().max(1))
    }

    /// sum_{|gamma| = 2m+j} (-1)^{(2m+j - parity)/...} handled by caller;
    /// returns sum_gamma gamma! * [delta^gamma coefficient of c_gamma], the
    /// eta-derivative sum of the x^gamma coefficients of (|x|^2)^m (x.eta)^j |eta|^q.
    fn dop(d: usize, m: usize, j: usize, q: i32) -> Frac {
        let n = 2 * m + j;
        let proto = QPoly::new(d, n);
        let eta0 = base_direction(d);
        let ev: Vec<QPoly> = (0..d).map(|i| eta_var(&proto, i, &eta0)).collect();
        let nrm_q = norm_pow(&proto, &ev, q);
        let mus = multi_indices(d, m);
        let nus = multi_indices(d, j);
        let mut total = Frac::ZERO;
        for mu in &mus {
            for nu in &nus {
                let gamma: Vec<usize> = (0..d).map(|i| 2 * mu[i] + nu[i]).collect();
                // multinomial m!/mu! and j!/nu!
                let mut cmn = fact(m).mul(fact(j));
                for &a in mu.iter().chain(nu.iter()) {
                    cmn = cmn.mul(Frac::new(1, fact(a).n));
                }
                let mut cpoly = nrm_q.scale(cmn);
                for (i, &p) in nu.iter().enumerate() {
                    for _ in 0..p {
                        cpoly = cpoly.mul(&ev[i]);
                    }
                }
                let mut gfact = Frac::ONE;
                for &g in &gamma {
                    gfact = gfact.mul(fact(g));
                }
                total = total.add(cpoly.coeff(&gamma).mul(gfact));
            }
        }
        total
    }

    /// The table at eps = h = 1 (all values real rationals).
    pub fn table(d: usize, kmax: usize) -> Vec<f64> {
        let mut s = vec![Frac::ZERO; kmax + 1];
        s[0] = Frac::ONE;
        for lev in 1..=kmax {
            let mut acc = Frac::ZERO;
            for m in 0..=lev {
                for j in 0..=(lev - m) {
                    if m + j == 0 {
                        continue;
                    }
                    let l = lev - m - j;
                    if l > 0 && s[l].is_zero() {
                        continue;
                    }
                    // i^{2m+j} (i)^j C(1/2, j) (-1/2)^m/m! collapses to the
                    // real factor (-1)^{m+j} C(1/2, j) (-1/2)^m / m!
                    let sign = if (m + j) % 2 == 0 { 1 } else { -1 };
                    let mut factor = Frac::int(sign);
                    factor = factor.mul(binom_q2(1, j)); // C(1/2, j)
                    factor = factor.mul(Frac::new(
                        if m % 2 == 0 { 1 } else { -1 },
                        1 << m,
                    ));
                    factor = factor.mul(Frac::new(1, fact(m).n));
                    let dval = dop(d, m, j, m as i32 - j as i32 - l as i32);
                    acc = acc.add(factor.mul(dval).mul(s[l]));
                }
            }
            s[lev] = acc.neg();
        }
        s.into_iter().map(|f| f.to_f64()).collect()
    }
}

fn multi_indices(d: usize, total: usize) -> Vec<Vec<usize>> {
    fn rec(d: usize, total: usize, pos: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == d - 1 {
            cur[pos] = total;
            out.push(cur.clone());
            return;
        }
        for a in 0..=total {
            cur[pos] = a;
            rec(d, total - a, pos + 1, cur, out);
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![0usize; d];
    rec(d, total, 0, &mut cur, &mut out);
    out
}

fn binom_half(j: usize) -> f64 {
    // C(1/2, j)
    let mut c = 1.0;
    for i in 0..j {
        c *= (0.5 - i as f64) / (i as f64 + 1.0);
    }
    c
}

// ---------------------------------------------------------------------------
// F_k operators (used by the reduction; exposed for the algebra tests)
// ---------------------------------------------------------------------------

/// F_k a = sum_{|al| = k} (phi_eta)^al / al! L_al a.
pub fn f_op(ctx: &PhaseContext, k: usize, a: &Jet<C64>) -> Jet<C64> {
    if k == 0 {
        return a.clone();
    }
    let mut out = Jet::zero(&ctx.pj.sh);
    for i in 0..=k {
        let j = k - i;
        let la = ctx.l_multi(a, i, j).scale(1.0 / (fact(i) * fact(j)));
        let term = ctx.neg_phi_eta_pow(i, j).mul_vanishing(i + j, &la);
        // neg_phi_eta_pow carries (-1)^{i+j}; F_k wants the plain power
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        out = out.add(&term.scale(sign));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere() -> MetricModel {
        MetricModel::sphere(1.0)
    }
    fn hyper() -> MetricModel {
        MetricModel::hyperbolic(1.0)
    }

    fn random_amplitude(sh: &Arc<Shape>, seed: u64) -> Jet<C64> {
        let mut j = Jet::zero(sh);
        let mut state = seed;
        for c in j.c.iter_mut() {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let re = ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let im = ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            *c = c64(re, im);
        }
        j
    }

    #[test]
    fn flat_l_is_plain_derivative() {
        let m = MetricModel::flat_torus(8.0, 8.0);
        let ctx = PhaseContext::new(&m, [1.0, 1.0], [1.0, 0.0], 0.0, 0.7).unwrap();
        let a = random_amplitude(&ctx.pj.sh, 7);
        for al in 0..2 {
            let la = ctx.l_apply(&a, al);
            let da = a.derivative(al);
            let v = la.valid.min(da.valid);
            for (i, (x, y)) in la.c.iter().zip(&da.c).enumerate() {
                if la.shape.degree_of(i) <= v {
                    assert!((x - y).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn l_operators_commute() {
        let m = sphere();
        let ctx = PhaseContext::new(&m, [0.0, 0.0], [1.0, 0.5], 1.0, 1.0).unwrap();
        let a = random_amplitude(&ctx.pj.sh, 11);
        let ab = ctx.l_apply(&ctx.l_apply(&a, 0), 1);
        let ba = ctx.l_apply(&ctx.l_apply(&a, 1), 0);
        let diff = ab.sub(&ba);
        let valid = diff.valid;
        for (i, c) in diff.c.iter().enumerate() {
            if diff.shape.degree_of(i) <= valid {
                assert!(c.norm() < 1e-9, "coefficient {i}: {c}");
            }
        }
    }

    #[test]
    fn l_kronecker_pattern_on_phase_eta_powers() {
        // L_al (phi_eta)^be |_{x=x*} = al! for al = be, 0 otherwise
        let m = sphere();
        let ctx = PhaseContext::new(&m, [0.0, 0.0], [0.8, -0.3], 0.7, 0.9).unwrap();
        let pairs = [(1usize, 0usize), (0, 1), (2, 0), (1, 1), (0, 2)];
        for (i, j) in pairs {
            let mut pow = Jet::constant(&ctx.pj.sh, C64::ONE);
            for _ in 0..i {
                pow = pow.mul(&ctx.phi_eta[0]);
            }
            for _ in 0..j {
                pow = pow.mul(&ctx.phi_eta[1]);
            }
            for (a, b) in pairs {
                let v = ctx.l_multi(&pow, a, b).value();
                let expect = if (a, b) == (i, j) {
                    c64(fact(i) * fact(j), 0.0)
                } else {
                    C64::ZERO
                };
                assert!(
                    (v - expect).norm() < 1e-8,
                    "L^({a},{b}) phi_eta^({i},{j}) = {v}, want {expect}"
                );
            }
        }
    }

    #[test]
    fn f_recurrence_and_eigenrelation() {
        let m = hyper();
        let ctx = PhaseContext::new(&m, [0.1, 0.0], [1.0, 0.4], 0.5, 0.8).unwrap();
        let a = random_amplitude(&ctx.pj.sh, 23);
        // (k+1) F_{k+1} a = F_1 F_k a - k F_k a
        for k in 0..2usize {
            let fk = f_op(&ctx, k, &a);
            let lhs = f_op(&ctx, k + 1, &a).scale((k + 1) as f64);
            let rhs = f_op(&ctx, 1, &fk).sub(&fk.scale(k as f64));
            let diff = lhs.sub(&rhs);
            for (i, c) in diff.c.iter().enumerate() {
                if diff.shape.degree_of(i) <= diff.valid {
                    assert!(c.norm() < 1e-9, "k={k} coeff {i}: {c}");
                }
            }
        }
        // F_k (phi_eta)^al = C(|al|, k) (phi_eta)^al for |al| <= 4, k <= 2
        for (i, j) in [(1usize, 1usize), (2, 0), (2, 1), (0, 3), (2, 2)] {
            let mut pow = Jet::constant(&ctx.pj.sh, C64::ONE);
            for _ in 0..i {
                pow = pow.mul(&ctx.phi_eta[0]);
            }
            for _ in 0..j {
                pow = pow.mul(&ctx.phi_eta[1]);
            }
            for k in 1..=2usize {
                let lhs = f_op(&ctx, k, &pow);
                let n = i + j;
                let cb = if k > n {
                    0.0
                } else {
                    fact(n) / (fact(k) * fact(n - k))
                };
                let rhs = pow.scale(cb);
                let diff = lhs.sub(&rhs);
                for (idx, c) in diff.c.iter().enumerate() {
                    if diff.shape.degree_of(idx) <= diff.valid {
                        assert!(c.norm() < 1e-8, "k={k} (i,j)=({i},{j}) coeff {idx}: {c}");
                    }
                }
            }
        }
    }

    #[test]
    fn b2_has_second_order_zero_on_flow() {
        for m in [sphere(), hyper()] {
            for eps in [0.0, 1.0] {
                let ctx = PhaseContext::new(&m, [0.05, -0.1], [1.1, 0.4], eps, 1.1).unwrap();
                let (b2, _, _) = b_components(&ctx).unwrap();
                assert!(b2.value().norm() < 1e-9, "{:?} b2={}", m.kind, b2.value());
                for a in 0..2 {
                    let mut e = [0usize; 4];
                    e[a] = 1;
                    let g = extract_derivative(&b2.jet, &e).unwrap();
                    assert!(g.norm() < 1e-8, "{:?} grad b2 = {g}", m.kind);
                }
            }
        }
    }

    #[test]
    fn b2_hessian_is_curvature_contraction_at_t_zero() {
        // b2(0, x; 0, eta) = R^al_mu^be_nu eta_al eta_be x^mu x^nu + O(x^3)
        let m = sphere();
        let eta = [0.7, 1.2];
        let ctx = PhaseContext::new(&m, [0.0, 0.0], eta, 0.0, 0.0).unwrap();
        let (b2, _, _) = b_components(&ctx).unwrap();
        let riem = m.curvature_at([0.0, 0.0]).unwrap().riemann;
        for mu in 0..2 {
            for nu in 0..2 {
                let mut e = [0usize; 4];
                e[mu] += 1;
                e[nu] += 1;
                let hess = extract_derivative(&b2.jet, &e).unwrap();
                let mut expect = 0.0;
                for al in 0..2 {
                    for be in 0..2 {
                        expect += riem[al][mu][be][nu] * eta[al] * eta[be];
                        expect += riem[al][nu][be][mu] * eta[al] * eta[be];
                    }
                }
                assert!(
                    (hess.re - expect).abs() < 1e-7 && hess.im.abs() < 1e-9,
                    "H[{mu}][{nu}] = {hess} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn b0_value_at_time_zero_is_scalar_curvature_over_six() {
        // eps = 0: b0(0, x*; y, eta) = -R/6
        for (m, expect) in [(sphere(), -1.0 / 3.0), (hyper(), 1.0 / 3.0)] {
            let ctx = PhaseContext::new(&m, [0.0, 0.0], [1.0, 0.2], 0.0, 0.0).unwrap();
            let (_, _, b0) = b_components(&ctx).unwrap();
            assert!(
                (b0.value() - c64(expect, 0.0)).norm() < 1e-7,
                "{:?}: {} vs {expect}",
                m.kind,
                b0.value()
            );
        }
    }

    #[test]
    fn sphere_transport_terms_match_closed_forms() {
        // eps = 1 displays
        let m = sphere();
        for &t in &[0.2, 0.7, 1.3] {
            let (s2, s1, s0) = transport_terms(&m, [0.0, 0.0], [1.0, 0.0], 1.0, t).unwrap();
            let e2 = c64(0.0, 2.0 * t).exp();
            let e4 = c64(0.0, 4.0 * t).exp();
            let want2 = (e2 * 2.0 + e4 - 3.0) * 0.25;
            let want1 = (-e2 * 4.0 - e4 * 3.0 + 7.0) / 6.0;
            let want0 = (e2 - 8.0) / 12.0;
            assert!((s2 - want2).norm() < 1e-7, "t={t}: S-2 b2 = {s2} vs {want2}");
            assert!((s1 - want1).norm() < 1e-7, "t={t}: S-1 b1 = {s1} vs {want1}");
            assert!((s0 - want0).norm() < 1e-7, "t={t}: S0 b0 = {s0} vs {want0}");
        }
    }

    #[test]
    fn hyperbolic_transport_terms_match_closed_forms() {
        // eps = 0 displays
        let m = hyper();
        for &t in &[0.2, 0.7, 1.3] {
            let (s2, s1, s0) = transport_terms(&m, [0.0, 0.0], [0.6, 0.8], 0.0, t).unwrap();
            let sech2 = 1.0 / (t.cosh() * t.cosh());
            let want2 = c64(-(2.0 / 3.0) * (2.0 + (2.0 * t).cosh()) * sech2, 0.0);
            let want1 = -want2;
            let want0 = c64((3.0 + sech2) / 12.0, 0.0);
            assert!((s2 - want2).norm() < 1e-7, "t={t}: {s2} vs {want2}");
            assert!((s1 - want1).norm() < 1e-7, "t={t}: {s1} vs {want1}");
            assert!((s0 - want0).norm() < 1e-7, "t={t}: {s0} vs {want0}");
        }
    }

    #[test]
    fn raw_and_simplified_s_operators_agree() {
        for (m, eps) in [(sphere(), 1.0), (hyper(), 0.4)] {
            // the raw iterated form consumes more derivative orders
            let ctx = PhaseContext::with_order(&m, [0.0, 0.0], [1.0, 0.3], eps, 0.8, 8).unwrap();
            let (b2, b1, _) = b_components(&ctx).unwrap();
            let t1 = s_op(&ctx, 1, &b1).unwrap();
            let r1 = s_op_raw(&ctx, 1, &b1).unwrap();
            assert!((t1 - r1).norm() < 1e-8, "{:?} S-1: {t1} vs {r1}", m.kind);
            let t2 = s_op(&ctx, 2, &b2).unwrap();
            let r2 = s_op_raw(&ctx, 2, &b2).unwrap();
            assert!((t2 - r2).norm() < 1e-8, "{:?} S-2: {t2} vs {r2}", m.kind);
        }
    }

    #[test]
    fn s_minus_one_reduction_for_second_order_zero() {
        // For amplitudes with a second-order zero on the flow, S_{-1}
        // reduces to i d(L_be a)/d eta_be - (i/2) phi_eta_eta L L a.
        let m = sphere();
        let ctx = PhaseContext::new(&m, [0.0, 0.0], [1.0, -0.6], 1.0, 1.2).unwrap();
        let (b2, _, _) = b_components(&ctx).unwrap();
        let full = s_op(&ctx, 1, &b2).unwrap();
        let mut reduced = C64::ZERO;
        for be in 0..2 {
            reduced += ctx.l_apply(&b2.jet, be).derivative(2 + be).value() * C64::I;
        }
        for al in 0..2 {
            for be in 0..2 {
                let lab = ctx.l_apply(&ctx.l_apply(&b2.jet, al), be);
                reduced -= ctx.phi_etaeta[al][be].value() * lab.value() * c64(0.0, 0.5);
            }
        }
        assert!((full - reduced).norm() < 1e-8, "{full} vs {reduced}");
    }

    #[test]
    fn subprincipal_matches_sphere_epsilon_one() {
        let m = sphere();
        let eta = [1.0, 0.0];
        for &t in &[0.4, 1.0] {
            let a = subprincipal_symbol(&m, [0.0, 0.0], eta, 1.0, t, 1e-9).unwrap();
            let e2 = c64(0.0, 2.0 * t).exp();
            let e4 = c64(0.0, 4.0 * t).exp();
            let want = c64(0.0, t / 8.0) + (e2 * 2.0 + e4 * 3.0 - 5.0) / 96.0;
            assert!((a - want).norm() < 1e-7, "t={t}: {a} vs {want}");
        }
    }

    #[test]
    fn subprincipal_matches_hyperbolic_epsilon_zero() {
        let m = hyper();
        for &t in &[0.5, 1.0] {
            let a = subprincipal_symbol(&m, [0.0, 0.0], [1.0, 0.0], 0.0, t, 1e-9).unwrap();
            let want = c64(0.0, -(3.0 * t + t.tanh()) / 24.0);
            assert!((a - want).norm() < 1e-7, "t={t}: {a} vs {want}");
        }
    }

    #[test]
    fn subprincipal_is_homogeneous_of_degree_minus_one() {
        let m = sphere();
        let t = 0.8;
        let base = subprincipal_symbol(&m, [0.0, 0.0], [1.0, 0.4], 1.0, t, 1e-9).unwrap();
        for lam in [0.5, 3.0] {
            let scaled =
                subprincipal_symbol(&m, [0.0, 0.0], [lam, 0.4 * lam], 1.0, t, 1e-9).unwrap();
            assert!(
                (scaled - base / lam).norm() < 1e-8,
                "lambda={lam}: {scaled} vs {}",
                base / lam
            );
        }
    }

    #[test]
    fn small_time_law() {
        // coefficient = i R / (12 h)
        let m = sphere();
        let c = small_time_coefficient(&m, [0.0, 0.0], [2.0, 0.0]).unwrap();
        let want = c64(0.0, 2.0 / (12.0 * 2.0));
        assert!((c - want).norm() < 1e-4 * want.norm(), "{c} vs {want}");
        let mh = hyper();
        let c = small_time_coefficient(&mh, [0.0, 0.0], [1.0, 0.0]).unwrap();
        let want = c64(0.0, -2.0 / 12.0);
        assert!((c - want).norm() < 1e-4 * want.norm(), "{c} vs {want}");
        let mt = MetricModel::flat_torus(6.0, 6.0);
        let c = small_time_coefficient(&mt, [1.0, 1.0], [1.0, 0.0]).unwrap();
        assert!(c.norm() < 1e-8, "{c}");
    }

    #[test]
    fn fte_residual_is_small() {
        let cases = [
            (sphere(), 1.0, 0.7),
            (hyper(), 0.0, 1.2),
            (MetricModel::flat_torus(6.0, 6.0), 0.0, 1.0),
        ];
        for (m, eps, t) in cases {
            let r = fte_residual(&m, [0.4, 0.2], [1.0, 0.3], eps, t).unwrap();
            assert!(r.norm() < 1e-6, "{:?}: residual {r}", m.kind);
        }
    }

    #[test]
    fn identity_symbols_general_dimension() {
        // s_0 = 1, s_{-1} = 0, s_{-2} = (d-1)(d-2) eps^2 / (8 h^2)
        for d in [2usize, 3, 4] {
            for (eps, h) in [(1.0, 1.0), (0.7, 1.3)] {
                assert_eq!(identity_symbol(d, eps, 0, h).unwrap(), C64::ONE);
                let s1 = identity_symbol(d, eps, 1, h).unwrap();
                assert!(s1.norm() < 1e-12, "d={d}: s-1 = {s1}");
                let s2 = identity_symbol(d, eps, 2, h).unwrap();
                let want = ((d - 1) * (d - 2)) as f64 * eps * eps / (8.0 * h * h);
                assert!(
                    (s2 - c64(want, 0.0)).norm() < 1e-10 * (1.0 + want),
                    "d={d} eps={eps}: {s2} vs {want}"
                );
            }
        }
        // d = 3, eps = 1, h = 1: 2/8 = 1/4
        let v = identity_symbol(3, 1.0, 2, 1.0).unwrap();
        assert!((v - c64(0.25, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn identity_symbols_vanish_for_real_phase() {
        for k in 1..=6 {
            let v = identity_symbol(2, 0.0, k, 1.7).unwrap();
            assert!(v.norm() == 0.0, "k={k}: {v}");
        }
    }

    #[test]
    fn identity_symbol_rejects_unsupported_orders() {
        assert!(matches!(
            identity_symbol(3, 1.0, 3, 1.0),
            Err(WfError::UnsupportedOrder(3, 3))
        ));
        assert!(matches!(
            identity_symbol(2, 1.0, 11, 1.0),
            Err(WfError::UnsupportedOrder(11, 2))
        ));
    }

    #[test]
    fn quarter_shift_moves_subprincipal_linearly() {
        let m = sphere();
        let t = 0.9;
        let h = 2.0;
        let plain = subprincipal_symbol(&m, [0.0, 0.0], [h, 0.0], 1.0, t, 1e-9).unwrap();
        let shifted =
            subprincipal_symbol_shifted(&m, [0.0, 0.0], [h, 0.0], 1.0, t, 1e-9, 0.25).unwrap();
        let want = plain - c64(0.0, t / (8.0 * h));
        assert!((shifted - want).norm() < 1e-8, "{shifted} vs {want}");
    }

    #[test]
    fn symbol_series_caps_at_depth_one() {
        let s = SymbolSeries {
            model: sphere(),
            y: [0.0, 0.0],
            eta: [1.0, 0.0],
            eps: 1.0,
        };
        assert_eq!(s.component(0, 1.0).unwrap(), Some(C64::ONE));
        let a = s.component(1, 0.0).unwrap().unwrap();
        assert!(a.norm() < 1e-9, "a_-1(0) = {a}");
        assert_eq!(s.component(2, 1.0).unwrap(), None);
    }

    #[test]
    fn sphere_values_are_rotation_invariant() {
        // same invariant symbol from the plain and the equator-rotated charts
        let m = sphere();
        let (y2, e2) = phase::normalized_config(&m, [0.0, 0.0], [1.0, 0.0]).unwrap();
        let t = 1.3;
        let ctx_a = PhaseContext::new(&m, [0.0, 0.0], [1.0, 0.0], 1.0, t).unwrap();
        let ctx_b = PhaseContext::new(&m, y2, e2, 1.0, t).unwrap();
        let (a2, a1, a0) = b_components(&ctx_a).unwrap();
        let (b2, b1, b0) = b_components(&ctx_b).unwrap();
        for (x, y) in [
            (s_op(&ctx_a, 2, &a2).unwrap(), s_op(&ctx_b, 2, &b2).unwrap()),
            (s_op(&ctx_a, 1, &a1).unwrap(), s_op(&ctx_b, 1, &b1).unwrap()),
            (s_op(&ctx_a, 0, &a0).unwrap(), s_op(&ctx_b, 0, &b0).unwrap()),
        ] {
            assert!((x - y).norm() < 1e-7, "{x} vs {y}");
        }
    }
}
