//! Maslov index via the winding of det^2 phi_{x eta} along a periodic
//! trajectory, and the position/momentum forms that geometrise phi_{x eta}
//! on the flow-out submanifold.

use crate::error::{Result, WfError};
use crate::flow::{self, FlowState};
use crate::geometry::{Cot, MetricModel, Pt, quad_form};
use crate::phase::{self, BranchTracker};
use crate::scalar::{C64, c64};

/// Winding data for one loop traversal.
#[derive(Clone, Debug)]
pub struct MaslovPath {
    pub index: i64,
    /// (t, unwrapped arg det^2 phi_{x eta}) samples.
    pub samples: Vec<(f64, f64)>,
}

/// Maslov index of the loop of length `t_loop` issued from (y, eta):
/// ind = -(1/2 pi) * total change of arg det^2 phi_{x eta}|_{x = x*}.
pub fn maslov_index(
    model: &MetricModel,
    y: Pt,
    eta: Cot,
    t_loop: f64,
    eps: f64,
    n_steps: usize,
) -> Result<i64> {
    Ok(maslov_path(model, y, eta, t_loop, eps, n_steps)?.index)
}

pub fn maslov_path(
    model: &MetricModel,
    y: Pt,
    eta: Cot,
    t_loop: f64,
    eps: f64,
    n_steps: usize,
) -> Result<MaslovPath> {
    if eps <= 0.0 {
        return Err(WfError::BranchDegenerate(0.0));
    }
    // verify the loop: x*(T) = y in the chart and x*_eta(T) = 0
    let end = flow::flow_state(model, y, eta, t_loop)?;
    let sep = ((end.x_star[0] - y[0]).powi(2) + (end.x_star[1] - y[1]).powi(2)).sqrt();
    if sep > 1e-8 {
        return Err(WfError::NotALoop(format!(
            "x*({t_loop}) misses y by {sep:.3e}"
        )));
    }
    let jac_norm = end
        .dx_deta
        .iter()
        .flatten()
        .map(|v| v.abs())
        .fold(0.0, f64::max);
    if jac_norm > 1e-6 {
        return Err(WfError::NotALoop(format!(
            "x*_eta({t_loop}) has norm {jac_norm:.3e}"
        )));
    }
    // wind on the chart-equator configuration (sphere) to dodge the pole
    let (y2, eta2) = phase::normalized_config(model, y, eta)?;
    let mut tracker = BranchTracker::new(y2, eta2, eps);
    let n = n_steps.max(8);
    let mut samples = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = t_loop * k as f64 / n as f64;
        let arg = tracker.arg_at(model, t)?;
        samples.push((t, 2.0 * arg));
    }
    let total = samples.last().unwrap().1;
    let raw = -total / (2.0 * std::f64::consts::PI);
    let index = raw.round();
    if (raw - index).abs() > 1e-6 {
        return Err(WfError::NotALoop(format!(
            "winding {raw} is not an integer"
        )));
    }
    Ok(MaslovPath {
        index: index as i64,
        samples,
    })
}

/// Position and momentum forms at one flow state.
#[derive(Clone, Debug)]
pub struct PQForms {
    /// q^{alpha mu} = (x*)^alpha_{eta_mu}
    pub q: [[f64; 2]; 2],
    /// p^{alpha mu} = g^{alpha gamma}(x*) [ (xi*)_{gamma, eta_mu} -
    ///                Gamma^rho_{gamma beta}(x*) xi*_rho q^{beta mu} ]
    pub p: [[f64; 2]; 2],
    /// Q_{mu nu}, indices lowered with g(y).
    pub q_form: [[f64; 2]; 2],
    /// P_{mu nu}, indices lowered with g(y).
    pub p_form: [[f64; 2]; 2],
}

pub fn pq_forms(model: &MetricModel, state: &FlowState, y: Pt) -> Result<PQForms> {
    let mdx = model.metric_at(state.x_star)?;
    let gam = model.christoffel_at(state.x_star)?;
    let gy = model.metric_at(y)?.g;
    let q = state.dx_deta;
    let mut bracket = [[0.0; 2]; 2];
    for g in 0..2 {
        for mu in 0..2 {
            let mut v = state.dxi_deta[g][mu];
            for (r, gam_r) in gam.iter().enumerate() {
                for b in 0..2 {
                    v -= gam_r[g][b] * state.xi_star[r] * q[b][mu];
                }
            }
            bracket[g][mu] = v;
        }
    }
    let mut p = [[0.0; 2]; 2];
    for a in 0..2 {
        for mu in 0..2 {
            for g in 0..2 {
                p[a][mu] += mdx.g_inv[a][g] * bracket[g][mu];
            }
        }
    }
    let upper = |m: &[[f64; 2]; 2]| {
        let mut out = [[0.0; 2]; 2];
        for mu in 0..2 {
            for nu in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        out[mu][nu] += mdx.g[a][b] * m[a][mu] * m[b][nu];
                    }
                }
            }
        }
        out
    };
    let qq_up = upper(&q);
    let pp_up = upper(&p);
    let lower = |m: &[[f64; 2]; 2]| {
        let mut out = [[0.0; 2]; 2];
        for mu in 0..2 {
            for nu in 0..2 {
                for r in 0..2 {
                    for s in 0..2 {
                        out[mu][nu] += gy[mu][r] * gy[nu][s] * m[r][s];
                    }
                }
            }
        }
        out
    };
    Ok(PQForms {
        q,
        p,
        q_form: lower(&qq_up),
        p_form: lower(&pp_up),
    })
}

/// phi_{x eta}|_{x=x*} reconstructed from the forms: g(x*) (p - i eps h q).
pub fn phi_xeta_from_pq(
    model: &MetricModel,
    state: &FlowState,
    forms: &PQForms,
    eps: f64,
) -> Result<[[C64; 2]; 2]> {
    let g = model.metric_at(state.x_star)?.g;
    let h = flow::hamiltonian(model, state.x_star, state.xi_star)?;
    let mut out = [[C64::ZERO; 2]; 2];
    for a in 0..2 {
        for mu in 0..2 {
            for b in 0..2 {
                out[a][mu] += c64(g[a][b], 0.0)
                    * (c64(forms.p[b][mu], 0.0) - c64(0.0, eps * h) * forms.q[b][mu]);
            }
        }
    }
    Ok(out)
}

pub fn det2(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}
