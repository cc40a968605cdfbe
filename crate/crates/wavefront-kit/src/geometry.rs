//! Charts, metrics, connection, curvature and geodesic primitives for the
//! supported two-dimensional models.
//!
//! Built-ins (sphere, hyperbolic plane, flat torus) get closed-form distance,
//! exponential map and parallel transport through their ambient embeddings;
//! the conformal model falls back to geodesic shooting. The chart-level
//! formulas are written against [`Field`] so the same code produces plain
//! values and jets.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WfError};
use crate::jets::{self, Jet};
use crate::ode;
use crate::scalar::{C64, Field};

pub type Pt = [f64; 2];
pub type Tan = [f64; 2];
pub type Cot = [f64; 2];

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ModelKind {
    Sphere2 {
        #[serde(default = "one")]
        radius: f64,
    },
    Hyperbolic2 {
        #[serde(default = "one")]
        scale: f64,
    },
    FlatTorus2 {
        lx: f64,
        ly: f64,
    },
    /// Metric e^{2 f} (du^2 + dv^2) with f a polynomial in chart coordinates,
    /// given as rows (i, j, c) meaning c * u^i * v^j.
    Conformal {
        coeffs: Vec<(u32, u32, f64)>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug)]
pub struct MetricModel {
    pub kind: ModelKind,
    /// Sphere chart rejects points beyond this radius (stereographic pole).
    pub chart_radius_max: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct MetricData {
    pub g: [[f64; 2]; 2],
    pub g_inv: [[f64; 2]; 2],
    pub rho: f64,
}

#[derive(Clone, Debug)]
pub struct Curvature {
    /// riemann[rho][sigma][mu][nu] = R^rho_{sigma mu nu}
    pub riemann: [[[[f64; 2]; 2]; 2]; 2],
    pub ricci: [[f64; 2]; 2],
    pub scalar: f64,
}

#[derive(Clone, Debug)]
pub struct GeodesicSegment {
    pub p: Pt,
    pub q: Pt,
    pub initial_velocity: Tan,
    pub length: f64,
}

impl MetricModel {
    pub fn new(kind: ModelKind) -> Self {
        MetricModel {
            kind,
            chart_radius_max: 1e3,
        }
    }

    pub fn sphere(radius: f64) -> Self {
        Self::new(ModelKind::Sphere2 { radius })
    }

    pub fn hyperbolic(scale: f64) -> Self {
        Self::new(ModelKind::Hyperbolic2 { scale })
    }

    pub fn flat_torus(lx: f64, ly: f64) -> Self {
        Self::new(ModelKind::FlatTorus2 { lx, ly })
    }

    pub fn conformal(coeffs: Vec<(u32, u32, f64)>) -> Self {
        Self::new(ModelKind::Conformal { coeffs })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let kind: ModelKind =
            serde_json::from_str(s).map_err(|e| WfError::ModelLoad(e.to_string()))?;
        Ok(Self::new(kind))
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| WfError::ModelLoad(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&s)
    }

    pub fn dim(&self) -> usize {
        2
    }

    pub fn check_chart(&self, x: Pt) -> Result<()> {
        if !x[0].is_finite() || !x[1].is_finite() {
            return Err(WfError::PointOutsideChart(x[0], x[1]));
        }
        if let ModelKind::Sphere2 { .. } = self.kind {
            if (x[0] * x[0] + x[1] * x[1]).sqrt() > self.chart_radius_max {
                return Err(WfError::PointOutsideChart(x[0], x[1]));
            }
        }
        Ok(())
    }

    /// Positions on the torus live in [0, L); other charts pass through.
    pub fn normalize_point(&self, x: Pt) -> Pt {
        match self.kind {
            ModelKind::FlatTorus2 { lx, ly } => [x[0].rem_euclid(lx), x[1].rem_euclid(ly)],
            _ => x,
        }
    }

    // -- metric ------------------------------------------------------------

    pub fn metric_generic<S: Field>(&self, x: &[S; 2]) -> [[S; 2]; 2] {
        let zero = x[0].lift(0.0);
        match &self.kind {
            ModelKind::Sphere2 { radius } => {
                let k2 = x[0]
                    .mul(&x[0])
                    .add(&x[1].mul(&x[1]))
                    .scale(1.0 / (4.0 * radius * radius));
                let c = k2.add(&x[0].lift(1.0)).recip();
                let c2 = c.mul(&c);
                [[c2.clone(), zero.clone()], [zero, c2]]
            }
            ModelKind::Hyperbolic2 { scale } => {
                let a2 = scale * scale;
                let u = &x[0];
                let v = &x[1];
                let d = u.mul(u).add(&v.mul(v)).add(&u.lift(a2));
                let dinv = d.recip();
                let g11 = v.mul(v).add(&u.lift(a2)).mul(&dinv);
                let g22 = u.mul(u).add(&u.lift(a2)).mul(&dinv);
                let g12 = u.mul(v).neg().mul(&dinv);
                [[g11, g12.clone()], [g12, g22]]
            }
            ModelKind::FlatTorus2 { .. } => {
                let one = x[0].lift(1.0);
                [[one.clone(), zero.clone()], [zero, one]]
            }
            ModelKind::Conformal { coeffs } => {
                let f = conformal_f(coeffs, x);
                let e2f = f.scale(2.0).exp();
                [[e2f.clone(), zero.clone()], [zero, e2f]]
            }
        }
    }

    /// Inverse metric, closed form per model (polynomial or rational).
    pub fn cometric_generic<S: Field>(&self, x: &[S; 2]) -> [[S; 2]; 2] {
        let zero = x[0].lift(0.0);
        match &self.kind {
            ModelKind::Sphere2 { radius } => {
                let k2 = x[0]
                    .mul(&x[0])
                    .add(&x[1].mul(&x[1]))
                    .scale(1.0 / (4.0 * radius * radius));
                let c = k2.add(&x[0].lift(1.0));
                let c2 = c.mul(&c);
                [[c2.clone(), zero.clone()], [zero, c2]]
            }
            ModelKind::Hyperbolic2 { scale } => {
                let inv_a2 = 1.0 / (scale * scale);
                let u = &x[0];
                let v = &x[1];
                let g11 = u.mul(u).add(&u.lift(scale * scale)).scale(inv_a2);
                let g22 = v.mul(v).add(&u.lift(scale * scale)).scale(inv_a2);
                let g12 = u.mul(v).scale(inv_a2);
                [[g11, g12.clone()], [g12, g22]]
            }
            ModelKind::FlatTorus2 { .. } => {
                let one = x[0].lift(1.0);
                [[one.clone(), zero.clone()], [zero, one]]
            }
            ModelKind::Conformal { coeffs } => {
                let f = conformal_f(coeffs, x);
                let e = f.scale(-2.0).exp();
                [[e.clone(), zero.clone()], [zero, e]]
            }
        }
    }

    /// d g^{alpha beta} / d x^gamma, closed form (used by the Hamilton RHS).
    pub fn cometric_grad_generic<S: Field>(&self, x: &[S; 2]) -> [[[S; 2]; 2]; 2] {
        let zero = x[0].lift(0.0);
        let mut out: [[[S; 2]; 2]; 2] = [
            [[zero.clone(), zero.clone()], [zero.clone(), zero.clone()]],
            [[zero.clone(), zero.clone()], [zero.clone(), zero.clone()]],
        ];
        match &self.kind {
            ModelKind::Sphere2 { radius } => {
                // g^inv = c^2 I, c = 1 + |x|^2/(4R^2): d(c^2)/dx = 2 c x/(2R^2)
                let r2 = 4.0 * radius * radius;
                let k2 = x[0].mul(&x[0]).add(&x[1].mul(&x[1])).scale(1.0 / r2);
                let c = k2.add(&x[0].lift(1.0));
                for gam in 0..2 {
                    let d = c.mul(&x[gam]).scale(4.0 / r2);
                    out[gam][0][0] = d.clone();
                    out[gam][1][1] = d;
                }
            }
            ModelKind::Hyperbolic2 { scale } => {
                let s = 1.0 / (scale * scale);
                // g^inv = (1/a^2) [[a^2+u^2, uv], [uv, a^2+v^2]]
                out[0][0][0] = x[0].scale(2.0 * s);
                out[0][0][1] = x[1].scale(s);
                out[0][1][0] = x[1].scale(s);
                out[1][0][1] = x[0].scale(s);
                out[1][1][0] = x[0].scale(s);
                out[1][1][1] = x[1].scale(2.0 * s);
            }
            ModelKind::FlatTorus2 { .. } => {}
            ModelKind::Conformal { coeffs } => {
                let f = conformal_f(coeffs, x);
                let e = f.scale(-2.0).exp();
                for gam in 0..2 {
                    let df = conformal_f_grad(coeffs, x, gam);
                    let d = e.mul(&df).scale(-2.0);
                    out[gam][0][0] = d.clone();
                    out[gam][1][1] = d;
                }
            }
        }
        out
    }

    pub fn metric_at(&self, x: Pt) -> Result<MetricData> {
        self.check_chart(x)?;
        let g = self.metric_generic(&[x[0], x[1]]);
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        if det <= 0.0 {
            return Err(WfError::PointOutsideChart(x[0], x[1]));
        }
        let g_inv = [
            [g[1][1] / det, -g[0][1] / det],
            [-g[1][0] / det, g[0][0] / det],
        ];
        Ok(MetricData {
            g,
            g_inv,
            rho: det.sqrt(),
        })
    }

    pub fn rho(&self, x: Pt) -> Result<f64> {
        Ok(self.metric_at(x)?.rho)
    }

    fn metric_jets(&self, x: Pt, order: usize) -> Result<[[Jet<C64>; 2]; 2]> {
        self.check_chart(x)?;
        let sh = jets::shape(2, order);
        let vars: [Jet<C64>; 2] = [
            Jet::variable(&sh, 0, C64::new(x[0], 0.0)),
            Jet::variable(&sh, 1, C64::new(x[1], 0.0)),
        ];
        Ok(self.metric_generic(&vars))
    }

    /// Christoffel symbols Gamma^mu_{alpha nu}, indices [mu][alpha][nu].
    pub fn christoffel_at(&self, x: Pt) -> Result<[[[f64; 2]; 2]; 2]> {
        let gj = self.metric_jets(x, 1)?;
        let md = self.metric_at(x)?;
        let mut dg = [[[0.0; 2]; 2]; 2]; // dg[gamma][mu][nu] = d_gamma g_{mu nu}
        for gam in 0..2 {
            for mu in 0..2 {
                for nu in 0..2 {
                    dg[gam][mu][nu] = gj[mu][nu].derivative(gam).value().re;
                }
            }
        }
        let mut gamma = [[[0.0; 2]; 2]; 2];
        for mu in 0..2 {
            for a in 0..2 {
                for n in 0..2 {
                    let mut s = 0.0;
                    for l in 0..2 {
                        s += md.g_inv[mu][l] * (dg[a][l][n] + dg[n][l][a] - dg[l][a][n]);
                    }
                    gamma[mu][a][n] = 0.5 * s;
                }
            }
        }
        Ok(gamma)
    }

    pub fn curvature_at(&self, x: Pt) -> Result<Curvature> {
        let gj = self.metric_jets(x, 2)?;
        let md = self.metric_at(x)?;
        // Christoffels as order-1 jets in x.
        let sh = gj[0][0].shape.clone();
        let det = gj[0][0].mul(&gj[1][1]).sub(&gj[0][1].mul(&gj[1][0]));
        let dinv = det.recip()?;
        let ginv = [
            [gj[1][1].mul(&dinv), gj[0][1].neg().mul(&dinv)],
            [gj[1][0].neg().mul(&dinv), gj[0][0].mul(&dinv)],
        ];
        let mut gam: Vec<Jet<C64>> = vec![Jet::zero(&sh); 8];
        for mu in 0..2 {
            for a in 0..2 {
                for n in 0..2 {
                    let mut s = Jet::zero(&sh);
                    for l in 0..2 {
                        let t = gj[l][n]
                            .derivative(a)
                            .add(&gj[l][a].derivative(n))
                            .sub(&gj[a][n].derivative(l));
                        s = s.add(&ginv[mu][l].mul(&t));
                    }
                    gam[4 * mu + 2 * a + n] = s.scale(0.5);
                }
            }
        }
        let gam_v = |mu: usize, a: usize, n: usize| gam[4 * mu + 2 * a + n].value().re;
        let gam_d = |mu: usize, a: usize, n: usize, g: usize| {
            gam[4 * mu + 2 * a + n].derivative(g).value().re
        };
        let mut riemann = [[[[0.0; 2]; 2]; 2]; 2];
        for r in 0..2 {
            for s in 0..2 {
                for m in 0..2 {
                    for n in 0..2 {
                        let mut v = gam_d(r, n, s, m) - gam_d(r, m, s, n);
                        for l in 0..2 {
                            v += gam_v(r, m, l) * gam_v(l, n, s) - gam_v(r, n, l) * gam_v(l, m, s);
                        }
                        riemann[r][s][m][n] = v;
                    }
                }
            }
        }
        let mut ricci = [[0.0; 2]; 2];
        for s in 0..2 {
            for n in 0..2 {
                let mut v = 0.0;
                for m in 0..2 {
                    v += riemann[m][s][m][n];
                }
                ricci[s][n] = v;
            }
        }
        let mut scalar = 0.0;
        for s in 0..2 {
            for n in 0..2 {
                scalar += md.g_inv[s][n] * ricci[s][n];
            }
        }
        Ok(Curvature {
            riemann,
            ricci,
            scalar,
        })
    }

    // -- embeddings (generic) ----------------------------------------------

    /// Unit-sphere embedding of a chart point (|P| = 1 in E^3).
    pub fn sphere_embed_unit<S: Field>(&self, radius: f64, z: &[S; 2]) -> [S; 3] {
        let r2 = 4.0 * radius * radius;
        let k2 = z[0].mul(&z[0]).add(&z[1].mul(&z[1])).scale(1.0 / r2);
        let denom = k2.add(&z[0].lift(1.0)).recip();
        [
            z[0].mul(&denom).scale(1.0 / radius),
            z[1].mul(&denom).scale(1.0 / radius),
            k2.sub(&z[0].lift(1.0)).mul(&denom),
        ]
    }

    /// Inverse stereographic chart of a unit-sphere point.
    pub fn sphere_chart_from_unit<S: Field>(&self, radius: f64, p: &[S; 3]) -> [S; 3] {
        // returns [u, v, guard] where guard = 1 - P3 must stay > 0
        let denom = p[2].neg().add(&p[0].lift(1.0));
        let dinv = denom.recip();
        [
            p[0].mul(&dinv).scale(2.0 * radius),
            p[1].mul(&dinv).scale(2.0 * radius),
            denom,
        ]
    }

    /// Jacobian of the *unit* sphere embedding: columns d P-hat / d z^alpha.
    pub fn sphere_embed_jac<S: Field>(&self, radius: f64, z: &[S; 2]) -> [[S; 3]; 2] {
        let r2 = 4.0 * radius * radius;
        let k2 = z[0].mul(&z[0]).add(&z[1].mul(&z[1])).scale(1.0 / r2);
        let c = k2.add(&z[0].lift(1.0));
        let cinv = c.recip();
        let cinv2 = cinv.mul(&cinv);
        let mut jac: [[S; 3]; 2] = [
            [z[0].lift(0.0), z[0].lift(0.0), z[0].lift(0.0)],
            [z[0].lift(0.0), z[0].lift(0.0), z[0].lift(0.0)],
        ];
        for a in 0..2 {
            let dk2 = z[a].scale(2.0 / r2);
            // d(z_i / (R c)) = delta_ia/(R c) - z_i dk2 /(R c^2)
            for i in 0..2 {
                let mut t = z[i].mul(&dk2).neg().mul(&cinv2).scale(1.0 / radius);
                if i == a {
                    t = t.add(&cinv.scale(1.0 / radius));
                }
                jac[a][i] = t;
            }
            // d((k2-1)/c) = dk2/c - (k2-1) dk2 / c^2 = dk2 (c - (k2-1))/c^2 = dk2 * 2/c^2
            jac[a][2] = dk2.mul(&cinv2).scale(2.0);
        }
        jac
    }

    /// Unit hyperboloid embedding (<P,P>_M = -1).
    pub fn hyper_embed_unit<S: Field>(&self, scale: f64, z: &[S; 2]) -> [S; 3] {
        let w = z[0]
            .mul(&z[0])
            .add(&z[1].mul(&z[1]))
            .add(&z[0].lift(scale * scale))
            .sqrt();
        [
            z[0].scale(1.0 / scale),
            z[1].scale(1.0 / scale),
            w.scale(1.0 / scale),
        ]
    }

    pub fn hyper_embed_jac<S: Field>(&self, scale: f64, z: &[S; 2]) -> [[S; 3]; 2] {
        let w = z[0]
            .mul(&z[0])
            .add(&z[1].mul(&z[1]))
            .add(&z[0].lift(scale * scale))
            .sqrt();
        let winv = w.recip();
        let zero = z[0].lift(0.0);
        let one_s = 1.0 / scale;
        [
            [
                z[0].lift(one_s),
                zero.clone(),
                z[0].mul(&winv).scale(one_s),
            ],
            [zero, z[1].lift(one_s), z[1].mul(&winv).scale(one_s)],
        ]
    }

    // -- geodesic primitives (f64 API) --------------------------------------

    pub fn injectivity_radius(&self, p: Pt) -> f64 {
        match &self.kind {
            ModelKind::Sphere2 { radius } => PI * radius,
            ModelKind::Hyperbolic2 { .. } => f64::INFINITY,
            ModelKind::FlatTorus2 { lx, ly } => 0.5 * lx.min(*ly),
            ModelKind::Conformal { .. } => self.conformal_injectivity_estimate(p),
        }
    }

    pub fn geodesic_distance(&self, p: Pt, q: Pt) -> Result<f64> {
        self.check_chart(p)?;
        self.check_chart(q)?;
        match &self.kind {
            ModelKind::Sphere2 { radius } => {
                let pp = self.sphere_embed_unit(*radius, &[p[0], p[1]]);
                let qq = self.sphere_embed_unit(*radius, &[q[0], q[1]]);
                let c = (dot3(&pp, &qq)).clamp(-1.0, 1.0);
                Ok(radius * c.acos())
            }
            ModelKind::Hyperbolic2 { scale } => {
                let pp = self.hyper_embed_unit(*scale, &[p[0], p[1]]);
                let qq = self.hyper_embed_unit(*scale, &[q[0], q[1]]);
                let c = (-mdot3(&pp, &qq)).max(1.0);
                Ok(scale * (c + (c * c - 1.0).sqrt()).ln())
            }
            ModelKind::FlatTorus2 { lx, ly } => {
                let d = [wrap_diff(q[0] - p[0], *lx), wrap_diff(q[1] - p[1], *ly)];
                Ok((d[0] * d[0] + d[1] * d[1]).sqrt())
            }
            ModelKind::Conformal { .. } => {
                let v = self.exp_inverse(p, q)?;
                let g = self.metric_at(p)?.g;
                Ok(norm_g(&g, &v))
            }
        }
    }

    pub fn exp_map(&self, p: Pt, v: Tan) -> Result<Pt> {
        self.check_chart(p)?;
        let vnorm2 = {
            let g = self.metric_at(p)?.g;
            quad_form(&g, &v, &v)
        };
        if vnorm2 == 0.0 {
            return Ok(p);
        }
        match &self.kind {
            ModelKind::Sphere2 { radius } => {
                let pp = self.sphere_embed_unit(*radius, &[p[0], p[1]]);
                let jac = self.sphere_embed_jac(*radius, &[p[0], p[1]]);
                // V = J v is tangent to the unit sphere scaled by 1/R: |V| = |v|_g / R
                let mut vv = [0.0; 3];
                for i in 0..3 {
                    vv[i] = jac[0][i] * v[0] + jac[1][i] * v[1];
                }
                let theta = vnorm2.sqrt() / radius;
                let vn = norm3(&vv);
                let q = [
                    theta.cos() * pp[0] + theta.sin() * vv[0] / vn,
                    theta.cos() * pp[1] + theta.sin() * vv[1] / vn,
                    theta.cos() * pp[2] + theta.sin() * vv[2] / vn,
                ];
                let ch = self.sphere_chart_from_unit(*radius, &q);
                if ch[2] <= 1e-12 {
                    return Err(WfError::PointOutsideChart(f64::INFINITY, f64::INFINITY));
                }
                let out = [ch[0], ch[1]];
                self.check_chart(out)?;
                Ok(out)
            }
            ModelKind::Hyperbolic2 { scale } => {
                let pp = self.hyper_embed_unit(*scale, &[p[0], p[1]]);
                let jac = self.hyper_embed_jac(*scale, &[p[0], p[1]]);
                let mut vv = [0.0; 3];
                for i in 0..3 {
                    vv[i] = jac[0][i] * v[0] + jac[1][i] * v[1];
                }
                let theta = vnorm2.sqrt() / scale;
                let vn = mdot3(&vv, &vv).sqrt();
                let q = [
                    theta.cosh() * pp[0] + theta.sinh() * vv[0] / vn,
                    theta.cosh() * pp[1] + theta.sinh() * vv[1] / vn,
                    theta.cosh() * pp[2] + theta.sinh() * vv[2] / vn,
                ];
                Ok([q[0] * scale, q[1] * scale])
            }
            ModelKind::FlatTorus2 { .. } => Ok(self.normalize_point([p[0] + v[0], p[1] + v[1]])),
            ModelKind::Conformal { .. } => {
                let y = self.shoot_geodesic(p, v, 1.0)?;
                Ok([y[0], y[1]])
            }
        }
    }

    pub fn exp_inverse(&self, p: Pt, q: Pt) -> Result<Tan> {
        self.check_chart(p)?;
        self.check_chart(q)?;
        match &self.kind {
            ModelKind::Sphere2 { radius } => {
                let pp = self.sphere_embed_unit(*radius, &[p[0], p[1]]);
                let qq = self.sphere_embed_unit(*radius, &[q[0], q[1]]);
                let c = dot3(&pp, &qq).clamp(-1.0, 1.0);
                let dist = radius * c.acos();
                let rinj = PI * radius;
                if dist >= rinj * (1.0 - 1e-9) {
                    return Err(WfError::OutsideInjectivityRadius { dist, radius: rinj });
                }
                // V = R * (theta/sin theta) (Q - c P), pulled back through g^{-1} J^T
                let theta = c.acos();
                let f = if theta < 1e-8 {
                    1.0 + theta * theta / 6.0
                } else {
                    theta / theta.sin()
                };
                let w = [
                    radius * f * (qq[0] - c * pp[0]),
                    radius * f * (qq[1] - c * pp[1]),
                    radius * f * (qq[2] - c * pp[2]),
                ];
                self.pullback_sphere(*radius, p, &w)
            }
            ModelKind::Hyperbolic2 { scale } => {
                let pp = self.hyper_embed_unit(*scale, &[p[0], p[1]]);
                let qq = self.hyper_embed_unit(*scale, &[q[0], q[1]]);
                let c = (-mdot3(&pp, &qq)).max(1.0);
                let theta = (c + (c * c - 1.0).sqrt()).ln();
                let f = if theta < 1e-8 {
                    1.0 - theta * theta / 6.0
                } else {
                    theta / theta.sinh()
                };
                let w = [
                    scale * f * (qq[0] + mdot3(&pp, &qq) * pp[0]),
                    scale * f * (qq[1] + mdot3(&pp, &qq) * pp[1]),
                    scale * f * (qq[2] + mdot3(&pp, &qq) * pp[2]),
                ];
                self.pullback_hyper(*scale, p, &w)
            }
            ModelKind::FlatTorus2 { lx, ly } => {
                let d = [wrap_diff(q[0] - p[0], *lx), wrap_diff(q[1] - p[1], *ly)];
                let dist = (d[0] * d[0] + d[1] * d[1]).sqrt();
                let rinj = 0.5 * lx.min(*ly);
                if dist >= rinj * (1.0 + 1e-12) {
                    // beyond the cut locus the minimiser is ambiguous near the boundary
                    if d[0].abs() > lx / 2.0 * (1.0 - 1e-12) || d[1].abs() > ly / 2.0 * (1.0 - 1e-12)
                    {
                        return Err(WfError::OutsideInjectivityRadius { dist, radius: rinj });
                    }
                }
                Ok(d)
            }
            ModelKind::Conformal { .. } => self.conformal_exp_inverse(p, q),
        }
    }

    fn pullback_sphere(&self, radius: f64, p: Pt, w: &[f64; 3]) -> Result<Tan> {
        let jac = self.sphere_embed_jac(radius, &[p[0], p[1]]);
        let jt = [
            jac[0][0] * w[0] + jac[0][1] * w[1] + jac[0][2] * w[2],
            jac[1][0] * w[0] + jac[1][1] * w[1] + jac[1][2] * w[2],
        ];
        // J maps to the unit sphere: metric factor R^2 (g = R^2 J^T J)
        let gi = self.metric_at(p)?.g_inv;
        Ok([
            (gi[0][0] * jt[0] + gi[0][1] * jt[1]) * radius,
            (gi[1][0] * jt[0] + gi[1][1] * jt[1]) * radius,
        ])
    }

    fn pullback_hyper(&self, scale: f64, p: Pt, w: &[f64; 3]) -> Result<Tan> {
        let jac = self.hyper_embed_jac(scale, &[p[0], p[1]]);
        let jt = [
            jac[0][0] * w[0] + jac[0][1] * w[1] - jac[0][2] * w[2],
            jac[1][0] * w[0] + jac[1][1] * w[1] - jac[1][2] * w[2],
        ];
        let gi = self.metric_at(p)?.g_inv;
        Ok([
            (gi[0][0] * jt[0] + gi[0][1] * jt[1]) * scale,
            (gi[1][0] * jt[0] + gi[1][1] * jt[1]) * scale,
        ])
    }

    /// Parallel transport of a covector from p to q along the shortest geodesic.
    pub fn parallel_transport(&self, xi: Cot, p: Pt, q: Pt) -> Result<Cot> {
        self.check_chart(p)?;
        self.check_chart(q)?;
        match &self.kind {
            ModelKind::Sphere2 { radius } => {
                let pp = self.sphere_embed_unit(*radius, &[p[0], p[1]]);
                let qq = self.sphere_embed_unit(*radius, &[q[0], q[1]]);
                let c = dot3(&pp, &qq).clamp(-1.0, 1.0);
                let theta = c.acos();
                if theta >= PI * (1.0 - 1e-9) {
                    return Err(WfError::OutsideInjectivityRadius {
                        dist: radius * theta,
                        radius: PI * radius,
                    });
                }
                let gi = self.metric_at(p)?.g_inv;
                let v = [
                    gi[0][0] * xi[0] + gi[0][1] * xi[1],
                    gi[1][0] * xi[0] + gi[1][1] * xi[1],
                ];
                let jac = self.sphere_embed_jac(*radius, &[p[0], p[1]]);
                let mut w = [0.0; 3];
                for i in 0..3 {
                    w[i] = (jac[0][i] * v[0] + jac[1][i] * v[1]) * radius; // tangent at P-hat scaled
                }
                let wq = if theta < 1e-12 {
                    w
                } else {
                    let s = theta.sin();
                    let mut u = [0.0; 3];
                    for i in 0..3 {
                        u[i] = (qq[i] - c * pp[i]) / s;
                    }
                    let a = dot3(&w, &u);
                    let uq = [
                        -s * pp[0] + c * u[0],
                        -s * pp[1] + c * u[1],
                        -s * pp[2] + c * u[2],
                    ];
                    [
                        w[0] + a * (uq[0] - u[0]),
                        w[1] + a * (uq[1] - u[1]),
                        w[2] + a * (uq[2] - u[2]),
                    ]
                };
                let jq = self.sphere_embed_jac(*radius, &[q[0], q[1]]);
                Ok([
                    (jq[0][0] * wq[0] + jq[0][1] * wq[1] + jq[0][2] * wq[2]) * radius,
                    (jq[1][0] * wq[0] + jq[1][1] * wq[1] + jq[1][2] * wq[2]) * radius,
                ])
            }
            ModelKind::Hyperbolic2 { scale } => {
                let pp = self.hyper_embed_unit(*scale, &[p[0], p[1]]);
                let qq = self.hyper_embed_unit(*scale, &[q[0], q[1]]);
                let c = (-mdot3(&pp, &qq)).max(1.0);
                let theta = (c + (c * c - 1.0).sqrt()).ln();
                let gi = self.metric_at(p)?.g_inv;
                let v = [
                    gi[0][0] * xi[0] + gi[0][1] * xi[1],
                    gi[1][0] * xi[0] + gi[1][1] * xi[1],
                ];
                let jac = self.hyper_embed_jac(*scale, &[p[0], p[1]]);
                let mut w = [0.0; 3];
                for i in 0..3 {
                    w[i] = (jac[0][i] * v[0] + jac[1][i] * v[1]) * scale;
                }
                let wq = if theta < 1e-12 {
                    w
                } else {
                    let s = theta.sinh();
                    let mut u = [0.0; 3];
                    for i in 0..3 {
                        u[i] = (qq[i] - c * pp[i]) / s;
                    }
                    let a = mdot3(&w, &u);
                    let uq = [
                        s * pp[0] + c * u[0],
                        s * pp[1] + c * u[1],
                        s * pp[2] + c * u[2],
                    ];
                    [
                        w[0] + a * (uq[0] - u[0]),
                        w[1] + a * (uq[1] - u[1]),
                        w[2] + a * (uq[2] - u[2]),
                    ]
                };
                let jq = self.hyper_embed_jac(*scale, &[q[0], q[1]]);
                Ok([
                    (jq[0][0] * wq[0] + jq[0][1] * wq[1] - jq[0][2] * wq[2]) * scale,
                    (jq[1][0] * wq[0] + jq[1][1] * wq[1] - jq[1][2] * wq[2]) * scale,
                ])
            }
            ModelKind::FlatTorus2 { .. } => Ok(xi),
            ModelKind::Conformal { .. } => self.conformal_transport(xi, p, q),
        }
    }

    pub fn geodesic_segment(&self, p: Pt, q: Pt) -> Result<GeodesicSegment> {
        let v = self.exp_inverse(p, q)?;
        let g = self.metric_at(p)?.g;
        Ok(GeodesicSegment {
            p,
            q,
            initial_velocity: v,
            length: norm_g(&g, &v),
        })
    }

    // -- conformal model: shooting ------------------------------------------

    fn conformal_coeffs(&self) -> &[(u32, u32, f64)] {
        match &self.kind {
            ModelKind::Conformal { coeffs } => coeffs,
            _ => unreachable!(),
        }
    }

    /// Geodesic RHS for state (x1, x2, v1, v2).
    fn geo_rhs<S: Field>(&self, y: &[S]) -> Vec<S> {
        let coeffs = self.conformal_coeffs();
        let x = [y[0].clone(), y[1].clone()];
        let f1 = conformal_f_grad(coeffs, &x, 0);
        let f2 = conformal_f_grad(coeffs, &x, 1);
        let (v1, v2) = (&y[2], &y[3]);
        let v11 = v1.mul(v1);
        let v22 = v2.mul(v2);
        let v12 = v1.mul(v2);
        // a^1 = -(f1 (v1^2 - v2^2) + 2 f2 v1 v2), a^2 = -(f2 (v2^2 - v1^2) + 2 f1 v1 v2)
        let a1 = f1.mul(&v11.sub(&v22)).add(&f2.mul(&v12).scale(2.0)).neg();
        let a2 = f2.mul(&v22.sub(&v11)).add(&f1.mul(&v12).scale(2.0)).neg();
        vec![v1.clone(), v2.clone(), a1, a2]
    }

    fn shoot_geodesic(&self, p: Pt, v: Tan, s1: f64) -> Result<Vec<f64>> {
        let y0 = vec![p[0], p[1], v[0], v[1]];
        ode::integrate(
            &|_s, y: &[f64]| Ok(self.geo_rhs(y)),
            0.0,
            y0,
            s1,
            1e-12,
            1e-12,
            &|s| s.abs(),
        )
    }

    fn conformal_exp_inverse(&self, p: Pt, q: Pt) -> Result<Tan> {
        // Newton on the initial velocity; Jacobian via order-1 jets through the flow.
        let mut v = [q[0] - p[0], q[1] - p[1]];
        let sh = jets::shape(2, 1);
        for it in 0..60 {
            let vars: Vec<Jet<C64>> = vec![
                Jet::constant(&sh, C64::new(p[0], 0.0)),
                Jet::constant(&sh, C64::new(p[1], 0.0)),
                Jet::variable(&sh, 0, C64::new(v[0], 0.0)),
                Jet::variable(&sh, 1, C64::new(v[1], 0.0)),
            ];
            let y = ode::integrate(
                &|_s, y: &[Jet<C64>]| Ok(self.geo_rhs(y)),
                0.0,
                vars,
                1.0,
                1e-12,
                1e-12,
                &|s| s.max_norm(),
            )?;
            let r = [y[0].value().re - q[0], y[1].value().re - q[1]];
            let res = (r[0] * r[0] + r[1] * r[1]).sqrt();
            if res < 1e-11 {
                return Ok(v);
            }
            let jmat = [
                [
                    y[0].coeff(&[1, 0]).unwrap().re,
                    y[0].coeff(&[0, 1]).unwrap().re,
                ],
                [
                    y[1].coeff(&[1, 0]).unwrap().re,
                    y[1].coeff(&[0, 1]).unwrap().re,
                ],
            ];
            let det = jmat[0][0] * jmat[1][1] - jmat[0][1] * jmat[1][0];
            if det.abs() < 1e-14 || it == 59 {
                return Err(WfError::OutsideInjectivityRadius {
                    dist: f64::NAN,
                    radius: f64::NAN,
                });
            }
            v[0] -= (jmat[1][1] * r[0] - jmat[0][1] * r[1]) / det;
            v[1] -= (-jmat[1][0] * r[0] + jmat[0][0] * r[1]) / det;
        }
        Err(WfError::OutsideInjectivityRadius {
            dist: f64::NAN,
            radius: f64::NAN,
        })
    }

    fn conformal_transport(&self, xi: Cot, p: Pt, q: Pt) -> Result<Cot> {
        let v = self.conformal_exp_inverse(p, q)?;
        // transport the covector along gamma(s): d zeta_b/ds = Gamma^r_{ab} vdot^a zeta_r
        let y0 = vec![p[0], p[1], v[0], v[1], xi[0], xi[1]];
        let coeffs = self.conformal_coeffs().to_vec();
        let me = self.clone();
        let f = move |_s: f64, y: &[f64]| -> Result<Vec<f64>> {
            let geo = me.geo_rhs(&y[..4]);
            let x = [y[0], y[1]];
            let f1 = conformal_f_grad(&coeffs, &x, 0);
            let f2 = conformal_f_grad(&coeffs, &x, 1);
            // Gamma^1 = [[f1, f2], [f2, -f1]], Gamma^2 = [[-f2, f1], [f1, f2]]
            let gam1 = [[f1, f2], [f2, -f1]];
            let gam2 = [[-f2, f1], [f1, f2]];
            let (vd, zeta) = ([y[2], y[3]], [y[4], y[5]]);
            let mut dz = [0.0; 2];
            for b in 0..2 {
                let mut s = 0.0;
                for a in 0..2 {
                    s += (gam1[a][b] * zeta[0] + gam2[a][b] * zeta[1]) * vd[a];
                }
                dz[b] = s;
            }
            Ok(vec![geo[0], geo[1], geo[2], geo[3], dz[0], dz[1]])
        };
        let y = ode::integrate(&f, 0.0, y0, 1.0, 1e-12, 1e-12, &|s| s.abs())?;
        Ok([y[4], y[5]])
    }

    fn conformal_injectivity_estimate(&self, p: Pt) -> f64 {
        // Shoot a few unit-speed rays; report where the transverse Jacobi
        // field first collapses, capped at a desk-scale search length.
        let md = match self.metric_at(p) {
            Ok(m) => m,
            Err(_) => return 0.0,
        };
        let cap: f64 = 20.0;
        let mut best = cap;
        let sh = jets::shape(1, 1);
        for k in 0..8 {
            let ang = 2.0 * PI * k as f64 / 8.0;
            let e = md.g[0][0].sqrt();
            let v = [ang.cos() / e, ang.sin() / e];
            // perturb the angle: v(a) with jet var a
            let va = [
                Jet::variable(&sh, 0, C64::new(ang, 0.0))
                    .apply(&crate::scalar::tower_cos)
                    .unwrap()
                    .scale(1.0 / e),
                Jet::variable(&sh, 0, C64::new(ang, 0.0))
                    .apply(&crate::scalar::tower_sin)
                    .unwrap()
                    .scale(1.0 / e),
            ];
            let _ = v;
            let y0 = vec![
                Jet::constant(&sh, C64::new(p[0], 0.0)),
                Jet::constant(&sh, C64::new(p[1], 0.0)),
                va[0].clone(),
                va[1].clone(),
            ];
            let mut t = 0.25f64;
            let mut prev: Option<f64> = None;
            while t < cap.min(best) {
                let y = match ode::integrate(
                    &|_s, y: &[Jet<C64>]| Ok(self.geo_rhs(y)),
                    0.0,
                    y0.clone(),
                    t,
                    1e-10,
                    1e-10,
                    &|s| s.max_norm(),
                ) {
                    Ok(y) => y,
                    Err(_) => break,
                };
                let j1 = y[0].coeff(&[1]).unwrap().re;
                let j2 = y[1].coeff(&[1]).unwrap().re;
                let jn = (j1 * j1 + j2 * j2).sqrt();
                if let Some(p0) = prev {
                    if jn < 1e-6 * p0.max(1.0) {
                        best = best.min(t);
                        break;
                    }
                }
                prev = Some(jn);
                t += 0.25;
            }
        }
        best
    }
}

// -- conformal factor helpers ------------------------------------------------

pub fn conformal_f<S: Field>(coeffs: &[(u32, u32, f64)], x: &[S; 2]) -> S {
    let mut acc = x[0].lift(0.0);
    for &(i, j, c) in coeffs {
        let mut term = x[0].lift(c);
        for _ in 0..i {
            term = term.mul(&x[0]);
        }
        for _ in 0..j {
            term = term.mul(&x[1]);
        }
        acc = acc.add(&term);
    }
    acc
}

pub fn conformal_f_grad<S: Field>(coeffs: &[(u32, u32, f64)], x: &[S; 2], gamma: usize) -> S {
    let mut acc = x[0].lift(0.0);
    for &(i, j, c) in coeffs {
        let (pi, pj, fac) = if gamma == 0 {
            if i == 0 {
                continue;
            }
            (i - 1, j, c * i as f64)
        } else {
            if j == 0 {
                continue;
            }
            (i, j - 1, c * j as f64)
        };
        let mut term = x[0].lift(fac);
        for _ in 0..pi {
            term = term.mul(&x[0]);
        }
        for _ in 0..pj {
            term = term.mul(&x[1]);
        }
        acc = acc.add(&term);
    }
    acc
}

// -- small linear algebra helpers ---------------------------------------------

pub fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Minkowski product with signature (+, +, -).
pub fn mdot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] - a[2] * b[2]
}

pub fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

pub fn quad_form(g: &[[f64; 2]; 2], a: &[f64; 2], b: &[f64; 2]) -> f64 {
    g[0][0] * a[0] * b[0] + g[0][1] * a[0] * b[1] + g[1][0] * a[1] * b[0] + g[1][1] * a[1] * b[1]
}

pub fn norm_g(g: &[[f64; 2]; 2], v: &[f64; 2]) -> f64 {
    quad_form(g, v, v).max(0.0).sqrt()
}

pub fn wrap_diff(d: f64, l: f64) -> f64 {
    d - l * (d / l).round()
}
