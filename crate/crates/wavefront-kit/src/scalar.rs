//! Scalar types underlying the jet algebra.
//!
//! Three layers:
//!   * [`C64`] — plain complex double.
//!   * [`TP`] — a univariate second-order jet in a time increment, used as the
//!     coefficient ring of phase/weight jets so that `phi_t`, `phi_tt`, `w_t`,
//!     `w_tt` come out of the same pipeline as the space/momentum derivatives.
//!   * [`Field`] — the interface the geometry and flow closed forms are written
//!     against, implemented by `f64` and by multivariate jets.
//!
//! Analytic functions are applied to jets by composing with a truncated Taylor
//! tower of the outer function at the jet's constant term. The towers here are
//! the ones the library actually needs; `acos_sq`/`acosh_sq` are the squared
//! arc-length functions of chordal gap used by the sphere and hyperboloid
//! closed forms, generated by their linear second-order ODEs so that the
//! expansion stays exact at the on-flow base point where the gap vanishes.

use num_complex::Complex64;

use crate::error::{Result, WfError};

pub type C64 = Complex64;

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Second-order truncated polynomial in a time increment: a0 + a1 dt + a2 dt^2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TP(pub [C64; 3]);

impl TP {
    pub fn constant(a: C64) -> Self {
        TP([a, C64::ZERO, C64::ZERO])
    }

    /// The time variable itself, centred at `t0`.
    pub fn time(t0: f64) -> Self {
        TP([c64(t0, 0.0), C64::ONE, C64::ZERO])
    }

    pub fn zero() -> Self {
        TP([C64::ZERO; 3])
    }

    pub fn add(&self, o: &TP) -> TP {
        TP([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }

    pub fn sub(&self, o: &TP) -> TP {
        TP([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }

    pub fn neg(&self) -> TP {
        TP([-self.0[0], -self.0[1], -self.0[2]])
    }

    pub fn mul(&self, o: &TP) -> TP {
        let a = &self.0;
        let b = &o.0;
        TP([
            a[0] * b[0],
            a[0] * b[1] + a[1] * b[0],
            a[0] * b[2] + a[1] * b[1] + a[2] * b[0],
        ])
    }

    pub fn scale(&self, s: f64) -> TP {
        TP([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    pub fn mul_c(&self, s: C64) -> TP {
        TP([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    /// Value / first / second time derivative (not Taylor coefficients).
    pub fn value(&self) -> C64 {
        self.0[0]
    }
    pub fn d1(&self) -> C64 {
        self.0[1]
    }
    pub fn d2(&self) -> C64 {
        self.0[2] * 2.0
    }

    pub fn max_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Apply an analytic function given its Taylor tower at `self.0[0]`
    /// extended two orders past `n`.
    fn apply_tower(&self, base: &[C64]) -> Vec<TP> {
        // f^(k)(a0 + nu)/k! = c_k + (k+1) c_{k+1} nu + (k+1)(k+2)/2 c_{k+2} nu^2
        // with nu = a1 dt + a2 dt^2 nilpotent.
        let n = base.len() - 2;
        let a1 = self.0[1];
        let a2 = self.0[2];
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let c0 = base[k];
            let c1 = base[k + 1] * ((k + 1) as f64);
            let c2 = base[k + 2] * (((k + 1) * (k + 2)) as f64 / 2.0);
            out.push(TP([c0, c1 * a1, c1 * a2 + c2 * a1 * a1]));
        }
        out
    }
}

/// Coefficient ring of a multivariate jet.
pub trait Coeff: Clone + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_c64(z: C64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, s: f64) -> Self;
    /// Absolute complex constant (for branch decisions).
    fn abs_const(&self) -> C64;
    fn max_norm(&self) -> f64;
    /// Taylor tower of an analytic function at this coefficient, orders 0..n.
    /// `gen(z0, m)` must return the complex tower at `z0` to order `m` inclusive.
    fn tower(&self, gen: &dyn Fn(C64, usize) -> Result<Vec<C64>>, n: usize) -> Result<Vec<Self>>;
}

impl Coeff for C64 {
    fn zero() -> Self {
        C64::ZERO
    }
    fn one() -> Self {
        C64::ONE
    }
    fn from_c64(z: C64) -> Self {
        z
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
    fn abs_const(&self) -> C64 {
        *self
    }
    fn max_norm(&self) -> f64 {
        self.norm()
    }
    fn tower(&self, gen: &dyn Fn(C64, usize) -> Result<Vec<C64>>, n: usize) -> Result<Vec<Self>> {
        gen(*self, n)
    }
}

impl Coeff for TP {
    fn zero() -> Self {
        TP::zero()
    }
    fn one() -> Self {
        TP::constant(C64::ONE)
    }
    fn from_c64(z: C64) -> Self {
        TP::constant(z)
    }
    fn add(&self, o: &Self) -> Self {
        TP::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        TP::sub(self, o)
    }
    fn neg(&self) -> Self {
        TP::neg(self)
    }
    fn mul(&self, o: &Self) -> Self {
        TP::mul(self, o)
    }
    fn scale(&self, s: f64) -> Self {
        TP::scale(self, s)
    }
    fn abs_const(&self) -> C64 {
        self.0[0]
    }
    fn max_norm(&self) -> f64 {
        TP::max_norm(self)
    }
    fn tower(&self, gen: &dyn Fn(C64, usize) -> Result<Vec<C64>>, n: usize) -> Result<Vec<Self>> {
        let base = gen(self.0[0], n + 2)?;
        Ok(self.apply_tower(&base))
    }
}

// ---------------------------------------------------------------------------
// Complex Taylor towers: coefficient k is f^(k)(z0)/k!.
// ---------------------------------------------------------------------------

pub fn tower_exp(z0: C64, n: usize) -> Result<Vec<C64>> {
    let e = z0.exp();
    let mut out = vec![e; n + 1];
    let mut fact = 1.0;
    for (k, item) in out.iter_mut().enumerate().skip(1) {
        fact *= k as f64;
        *item = e / fact;
    }
    Ok(out)
}

pub fn tower_ln(z0: C64, n: usize) -> Result<Vec<C64>> {
    if z0.norm() == 0.0 {
        return Err(WfError::NonAnalyticCall("ln at zero"));
    }
    let mut out = Vec::with_capacity(n + 1);
    out.push(z0.ln());
    let inv = z0.inv();
    let mut p = C64::ONE;
    for k in 1..=n {
        p *= inv;
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        out.push(p * (sign / k as f64));
    }
    Ok(out)
}

pub fn tower_recip(z0: C64, n: usize) -> Result<Vec<C64>> {
    if z0.norm() == 0.0 {
        return Err(WfError::NonAnalyticCall("reciprocal of zero constant term"));
    }
    let inv = z0.inv();
    let mut out = Vec::with_capacity(n + 1);
    let mut p = inv;
    out.push(p);
    for _ in 1..=n {
        p *= -inv;
        out.push(p);
    }
    Ok(out)
}

/// Tower of the square root branch that takes the value `s` at `z0` (s^2 = z0).
pub fn tower_sqrt_ref(z0: C64, s: C64, n: usize) -> Result<Vec<C64>> {
    tower_power_ref(z0, s, 0.5, n)
}

/// Tower of the fourth root branch that takes the value `r` at `z0` (r^4 = z0).
pub fn tower_root4_ref(z0: C64, r: C64, n: usize) -> Result<Vec<C64>> {
    tower_power_ref(z0, r, 0.25, n)
}

fn tower_power_ref(z0: C64, v0: C64, p: f64, n: usize) -> Result<Vec<C64>> {
    if z0.norm() == 0.0 {
        return Err(WfError::NonAnalyticCall("fractional power at zero"));
    }
    let inv = z0.inv();
    let mut out = Vec::with_capacity(n + 1);
    out.push(v0);
    let mut coef = v0;
    for k in 1..=n {
        // binom(p, k) accumulated: multiply by (p - k + 1)/k each step.
        coef = coef * ((p - (k as f64) + 1.0) / k as f64) * inv;
        out.push(coef);
    }
    Ok(out)
}

pub fn tower_sqrt(z0: C64, n: usize) -> Result<Vec<C64>> {
    tower_sqrt_ref(z0, z0.sqrt(), n)
}


pub fn tower_sin(z0: C64, n: usize) -> Result<Vec<C64>> {
    let (s, c) = (z0.sin(), z0.cos());
    let cycle = [s, c, -s, -c];
    let mut out = Vec::with_capacity(n + 1);
    let mut fact = 1.0;
    for k in 0..=n {
        if k > 0 {
            fact *= k as f64;
        }
        out.push(cycle[k % 4] / fact);
    }
    Ok(out)
}

pub fn tower_cos(z0: C64, n: usize) -> Result<Vec<C64>> {
    let (s, c) = (z0.sin(), z0.cos());
    let cycle = [c, -s, -c, s];
    let mut out = Vec::with_capacity(n + 1);
    let mut fact = 1.0;
    for k in 0..=n {
        if k > 0 {
            fact *= k as f64;
        }
        out.push(cycle[k % 4] / fact);
    }
    Ok(out)
}

pub fn tower_sinh(z0: C64, n: usize) -> Result<Vec<C64>> {
    let (s, c) = (z0.sinh(), z0.cosh());
    let mut out = Vec::with_capacity(n + 1);
    let mut fact = 1.0;
    for k in 0..=n {
        if k > 0 {
            fact *= k as f64;
        }
        out.push(if k % 2 == 0 { s } else { c } / fact);
    }
    Ok(out)
}

pub fn tower_cosh(z0: C64, n: usize) -> Result<Vec<C64>> {
    let (s, c) = (z0.sinh(), z0.cosh());
    let mut out = Vec::with_capacity(n + 1);
    let mut fact = 1.0;
    for k in 0..=n {
        if k > 0 {
            fact *= k as f64;
        }
        out.push(if k % 2 == 0 { c } else { s } / fact);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Squared geodesic arc as a function of the chordal gap.
//
// Sphere:     u = 1 - cos(theta),  G(u) = theta^2,  (2u - u^2) G'' + (1 - u) G' = 2.
// Hyperbolic: u = cosh(theta) - 1, H(u) = theta^2,  (2u + u^2) H'' + (1 + u) H' = 2.
//
// Both are analytic at u = 0 with radius 2 (sphere) / infinity-safe growth
// (hyperbolic). For small u the tower is produced by recentring the series at
// the origin; away from it the ODE recurrence at u0 is well conditioned.
// ---------------------------------------------------------------------------

fn series_at_zero(hyperbolic: bool, m: usize) -> Vec<f64> {
    // g_{k+1} = (2 delta_{k0} +/- k^2 g_k) / ((k+1)(2k+1))
    let mut g = vec![0.0; m + 1];
    for k in 0..m {
        let num = if k == 0 { 2.0 } else { 0.0 }
            + if hyperbolic { -1.0 } else { 1.0 } * (k * k) as f64 * g[k];
        g[k + 1] = num / (((k + 1) * (2 * k + 1)) as f64);
    }
    g
}

fn recentred_tower(hyperbolic: bool, u0: f64, n: usize) -> Vec<C64> {
    let m = n + 220;
    let g = series_at_zero(hyperbolic, m);
    let mut out = vec![C64::ZERO; n + 1];
    for (k, item) in out.iter_mut().enumerate() {
        // G^(k)(u0)/k! = sum_{j>=k} C(j,k) g_j u0^(j-k)
        let mut acc = 0.0;
        let mut binom = 1.0; // C(j,k) starting at j=k
        let mut pow = 1.0; // u0^(j-k)
        for j in k..=m {
            if j > k {
                binom *= j as f64 / (j - k) as f64;
                pow *= u0;
            }
            acc += binom * g[j] * pow;
        }
        *item = c64(acc, 0.0);
    }
    out
}

fn ode_tower(hyperbolic: bool, u0: f64, n: usize) -> Result<Vec<C64>> {
    let sgn = if hyperbolic { 1.0 } else { -1.0 };
    let alpha = 2.0 * u0 + sgn * u0 * u0;
    if alpha <= 0.0 {
        return Err(WfError::NonAnalyticCall("arc tower outside domain"));
    }
    let (theta, dtheta) = if hyperbolic {
        let th = (1.0 + u0 + (u0 * u0 + 2.0 * u0).sqrt()).ln();
        (th, 2.0 * th / th.sinh())
    } else {
        let th = (1.0 - u0).acos();
        (th, 2.0 * th / th.sin())
    };
    let beta = 2.0 + sgn * 2.0 * u0;
    let lin = 1.0 + sgn * u0;
    let mut g = vec![0.0; n + 1];
    g[0] = theta * theta;
    if n >= 1 {
        g[1] = dtheta;
    }
    for k in 0..n.saturating_sub(1) {
        let kf = k as f64;
        let num = if k == 0 { 2.0 } else { 0.0 } - sgn * kf * kf * g[k]
            - ((k + 1) as f64) * (beta * kf + lin) * g[k + 1];
        g[k + 2] = num / (alpha * ((k + 2) * (k + 1)) as f64);
    }
    Ok(g.into_iter().map(|x| c64(x, 0.0)).collect())
}

/// Tower of G(u) = arccos(1-u)^2 at real u0 in [0, 2).
pub fn tower_acos_sq(z0: C64, n: usize) -> Result<Vec<C64>> {
    let u0 = z0.re;
    if z0.im.abs() > 1e-9 || !(-1e-12..2.0 - 1e-9).contains(&u0) {
        return Err(WfError::NonAnalyticCall("acos_sq base outside [0,2)"));
    }
    let u0 = u0.max(0.0);
    if u0 < 0.5 {
        Ok(recentred_tower(false, u0, n))
    } else {
        ode_tower(false, u0, n)
    }
}

/// Tower of H(u) = arccosh(1+u)^2 at real u0 >= 0.
pub fn tower_acosh_sq(z0: C64, n: usize) -> Result<Vec<C64>> {
    let u0 = z0.re;
    if z0.im.abs() > 1e-9 || u0 < -1e-12 {
        return Err(WfError::NonAnalyticCall("acosh_sq base negative"));
    }
    let u0 = u0.max(0.0);
    if u0 < 0.5 {
        Ok(recentred_tower(true, u0, n))
    } else {
        ode_tower(true, u0, n)
    }
}

/// Shift a tower one slot: the tower of f' given the tower of f one order higher.
pub fn derivative_tower(t: &[C64]) -> Vec<C64> {
    (1..t.len()).map(|k| t[k] * k as f64).collect()
}

/// Tower of G'(u) for G(u) = arccos(1-u)^2 (G'/2 is the exp-inverse stretch).
pub fn tower_acos_sq_prime(z0: C64, n: usize) -> Result<Vec<C64>> {
    Ok(derivative_tower(&tower_acos_sq(z0, n + 1)?))
}

/// Tower of H'(u) for H(u) = arccosh(1+u)^2.
pub fn tower_acosh_sq_prime(z0: C64, n: usize) -> Result<Vec<C64>> {
    Ok(derivative_tower(&tower_acosh_sq(z0, n + 1)?))
}

// ---------------------------------------------------------------------------
// Field: what the geometric closed forms are written against.
// ---------------------------------------------------------------------------

/// Scalar interface for chart maps, metric formulas and closed-form flows.
pub trait Field: Clone + std::fmt::Debug {
    /// A constant with the same shape as `self`.
    fn lift(&self, x: f64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn scale(&self, s: f64) -> Self;
    fn sqrt(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn sinh(&self) -> Self;
    fn cosh(&self) -> Self;
    fn exp(&self) -> Self;
    fn recip(&self) -> Self;
    /// Real part of the absolute constant; used for wrap/branch decisions only.
    fn re_const(&self) -> f64;
}

impl Field for f64 {
    fn lift(&self, x: f64) -> Self {
        x
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn sinh(&self) -> Self {
        f64::sinh(*self)
    }
    fn cosh(&self) -> Self {
        f64::cosh(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn recip(&self) -> Self {
        1.0 / self
    }
    fn re_const(&self) -> f64 {
        *self
    }
}
