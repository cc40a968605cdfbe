//! Dense truncated multivariate Taylor arithmetic (jets).
//!
//! Coefficients are stored in graded-lexicographic order over a shared
//! [`Shape`] carrying precomputed multiplication and derivative tables.
//! A jet tracks `valid`, the total degree up to which its coefficients are
//! exact; every derivative lowers it by one and binary operations take the
//! minimum. Consumers assert the degree they need, which turns silent
//! order starvation into a hard error.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Result, WfError};
use crate::scalar::{self, C64, Coeff, Field};

const MAX_VARS: usize = 6;

type MIdx = [u8; MAX_VARS];

/// Precomputed index tables for a (n_vars, order) jet space.
#[derive(Debug)]
pub struct Shape {
    pub nv: usize,
    pub order: usize,
    midx: Vec<MIdx>,
    rank: HashMap<MIdx, u32>,
    deg: Vec<u8>,
    /// (i, j, k) triples with deg(i)+deg(j) = deg(k) <= order, grouped by deg(k).
    mul_table: Vec<(u32, u32, u32)>,
    /// mul_table index where output degree d starts, length order+2.
    mul_offsets: Vec<usize>,
    /// Per variable: (src, dst, factor) for partial differentiation.
    diff_table: Vec<Vec<(u32, u32, f64)>>,
}

impl Shape {
    pub fn len(&self) -> usize {
        self.midx.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, alpha: &[usize]) -> Option<usize> {
        let mut m = [0u8; MAX_VARS];
        for (i, &a) in alpha.iter().enumerate() {
            if i >= self.nv && a > 0 {
                return None;
            }
            if i < MAX_VARS {
                m[i] = a as u8;
            }
        }
        self.rank.get(&m).map(|&r| r as usize)
    }

    pub fn multi_index(&self, i: usize) -> &[u8] {
        &self.midx[i][..self.nv]
    }

    pub fn degree_of(&self, i: usize) -> usize {
        self.deg[i] as usize
    }
}

fn build_shape(nv: usize, order: usize) -> Shape {
    assert!(nv >= 1 && nv <= MAX_VARS, "jet variables limited to 1..=6");
    // Enumerate multi-indices by total degree, lexicographic within a degree.
    let mut midx: Vec<MIdx> = Vec::new();
    let mut stack = vec![[0u8; MAX_VARS]];
    for d in 0..=order {
        let mut level: Vec<MIdx> = Vec::new();
        fn emit(nv: usize, d: usize, pos: usize, cur: &mut MIdx, out: &mut Vec<MIdx>) {
            if pos == nv - 1 {
                cur[pos] = d as u8;
                out.push(*cur);
                cur[pos] = 0;
                return;
            }
            for a in (0..=d).rev() {
                cur[pos] = a as u8;
                emit(nv, d - a, pos + 1, cur, out);
            }
            cur[pos] = 0;
        }
        let mut cur = [0u8; MAX_VARS];
        emit(nv, d, 0, &mut cur, &mut level);
        level.sort();
        midx.extend(level);
        let _ = &mut stack;
    }
    let deg: Vec<u8> = midx
        .iter()
        .map(|m| m.iter().take(nv).map(|&a| a as usize).sum::<usize>() as u8)
        .collect();
    let mut rank = HashMap::with_capacity(midx.len());
    for (i, m) in midx.iter().enumerate() {
        rank.insert(*m, i as u32);
    }
    // Multiplication table grouped by output degree.
    let mut entries: Vec<(u8, u32, u32, u32)> = Vec::new();
    for i in 0..midx.len() {
        for j in 0..midx.len() {
            let d = deg[i] as usize + deg[j] as usize;
            if d > order {
                continue;
            }
            let mut sum = [0u8; MAX_VARS];
            for v in 0..nv {
                sum[v] = midx[i][v] + midx[j][v];
            }
            let k = rank[&sum];
            entries.push((d as u8, i as u32, j as u32, k));
        }
    }
    entries.sort_by_key(|e| e.0);
    let mut mul_offsets = vec![0usize; order + 2];
    for e in &entries {
        mul_offsets[e.0 as usize + 1] += 1;
    }
    for d in 0..=order {
        mul_offsets[d + 1] += mul_offsets[d];
    }
    let mul_table: Vec<(u32, u32, u32)> = entries.iter().map(|e| (e.1, e.2, e.3)).collect();
    // Derivative tables.
    let mut diff_table = Vec::with_capacity(nv);
    for v in 0..nv {
        let mut t = Vec::new();
        for (i, m) in midx.iter().enumerate() {
            if m[v] > 0 {
                let mut dst = *m;
                dst[v] -= 1;
                t.push((i as u32, rank[&dst], m[v] as f64));
            }
        }
        diff_table.push(t);
    }
    Shape {
        nv,
        order,
        midx,
        rank,
        deg,
        mul_table,
        mul_offsets,
        diff_table,
    }
}

static SHAPES: OnceLock<Mutex<HashMap<(usize, usize), Arc<Shape>>>> = OnceLock::new();

pub fn shape(nv: usize, order: usize) -> Arc<Shape> {
    let reg = SHAPES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = reg.lock().unwrap();
    map.entry((nv, order))
        .or_insert_with(|| Arc::new(build_shape(nv, order)))
        .clone()
}

/// Truncated Taylor expansion with coefficients in `C`.
#[derive(Clone, Debug)]
pub struct Jet<C: Coeff> {
    pub shape: Arc<Shape>,
    /// Coefficients are exact up to this total degree.
    pub valid: usize,
    pub c: Vec<C>,
}

impl<C: Coeff> Jet<C> {
    pub fn constant(shape: &Arc<Shape>, z: C) -> Self {
        let mut c = vec![C::zero(); shape.len()];
        c[0] = z;
        Jet {
            shape: shape.clone(),
            valid: shape.order,
            c,
        }
    }

    pub fn zero(shape: &Arc<Shape>) -> Self {
        Jet::constant(shape, C::zero())
    }

    /// base + delta_v as a jet.
    pub fn variable(shape: &Arc<Shape>, v: usize, base: C) -> Self {
        assert!(v < shape.nv);
        let mut j = Jet::constant(shape, base);
        let mut e = [0usize; MAX_VARS];
        e[v] = 1;
        let idx = shape.index_of(&e[..shape.nv]).expect("order >= 1 required");
        j.c[idx] = C::one();
        j
    }

    pub fn value(&self) -> C64 {
        self.c[0].abs_const()
    }

    pub fn constant_coeff(&self) -> &C {
        &self.c[0]
    }

    pub fn coeff(&self, alpha: &[usize]) -> Option<&C> {
        self.shape.index_of(alpha).map(|i| &self.c[i])
    }

    pub fn require(&self, degree: usize) -> Result<()> {
        if self.valid < degree {
            Err(WfError::JetOrderInsufficient {
                have: self.valid,
                need: degree,
            })
        } else {
            Ok(())
        }
    }

    pub fn add(&self, o: &Jet<C>) -> Jet<C> {
        self.zip(o, |a, b| a.add(b))
    }

    pub fn sub(&self, o: &Jet<C>) -> Jet<C> {
        self.zip(o, |a, b| a.sub(b))
    }

    fn zip(&self, o: &Jet<C>, f: impl Fn(&C, &C) -> C) -> Jet<C> {
        assert!(Arc::ptr_eq(&self.shape, &o.shape), "jet shape mismatch");
        let c = self.c.iter().zip(&o.c).map(|(a, b)| f(a, b)).collect();
        Jet {
            shape: self.shape.clone(),
            valid: self.valid.min(o.valid),
            c,
        }
    }

    pub fn neg(&self) -> Jet<C> {
        self.map(|a| a.neg())
    }

    pub fn scale(&self, s: f64) -> Jet<C> {
        self.map(|a| a.scale(s))
    }

    pub fn mul_coeff(&self, z: &C) -> Jet<C> {
        self.map(|a| a.mul(z))
    }

    fn map(&self, f: impl Fn(&C) -> C) -> Jet<C> {
        Jet {
            shape: self.shape.clone(),
            valid: self.valid,
            c: self.c.iter().map(&f).collect(),
        }
    }

    pub fn mul(&self, o: &Jet<C>) -> Jet<C> {
        self.mul_vanishing(0, o)
    }

    /// Product where `self` is known (structurally) to vanish to order
    /// `self_vanish` at the base point: coefficients of the product below
    /// degree `o.valid + self_vanish` only involve exact coefficients of `o`,
    /// so the exactness credit is restored.
    pub fn mul_vanishing(&self, self_vanish: usize, o: &Jet<C>) -> Jet<C> {
        assert!(Arc::ptr_eq(&self.shape, &o.shape), "jet shape mismatch");
        let valid = self
            .valid
            .min(o.valid + self_vanish)
            .min(self.shape.order);
        let mut c = vec![C::zero(); self.shape.len()];
        let end = self.shape.mul_offsets[valid + 1];
        for &(i, j, k) in &self.shape.mul_table[..end] {
            let p = self.c[i as usize].mul(&o.c[j as usize]);
            c[k as usize] = c[k as usize].add(&p);
        }
        Jet {
            shape: self.shape.clone(),
            valid,
            c,
        }
    }

    /// Partial derivative in variable `v`; exact degree drops by one.
    pub fn derivative(&self, v: usize) -> Jet<C> {
        assert!(self.valid > 0, "derivative of a jet with no valid orders");
        let mut c = vec![C::zero(); self.shape.len()];
        for &(src, dst, f) in &self.shape.diff_table[v] {
            c[dst as usize] = self.c[src as usize].scale(f);
        }
        Jet {
            shape: self.shape.clone(),
            valid: self.valid - 1,
            c,
        }
    }

    /// Compose with an analytic function given its tower generator.
    pub fn apply(&self, gen: &dyn Fn(C64, usize) -> Result<Vec<C64>>) -> Result<Jet<C>> {
        let n = self.valid;
        let tower = self.c[0].tower(gen, n)?;
        // Horner over the nilpotent part u = self - constant.
        let mut u = self.clone();
        u.c[0] = C::zero();
        let mut r = Jet::constant(&self.shape, tower[n].clone());
        r.valid = n;
        for k in (0..n).rev() {
            r = r.mul(&u);
            r.c[0] = r.c[0].add(&tower[k]);
        }
        r.valid = n;
        Ok(r)
    }

    pub fn recip(&self) -> Result<Jet<C>> {
        self.apply(&scalar::tower_recip)
    }

    pub fn div(&self, o: &Jet<C>) -> Result<Jet<C>> {
        Ok(self.mul(&o.recip()?))
    }

    pub fn exp(&self) -> Result<Jet<C>> {
        self.apply(&scalar::tower_exp)
    }

    pub fn ln(&self) -> Result<Jet<C>> {
        self.apply(&scalar::tower_ln)
    }

    pub fn sqrt(&self) -> Result<Jet<C>> {
        self.apply(&scalar::tower_sqrt)
    }

    /// Square root on the branch passing through `s0` at the constant term.
    pub fn sqrt_ref(&self, s0: C64) -> Result<Jet<C>> {
        self.apply(&move |z0, n| scalar::tower_sqrt_ref(z0, s0, n))
    }

    /// Fourth root on the branch passing through `r0` at the constant term.
    pub fn root4_ref(&self, r0: C64) -> Result<Jet<C>> {
        self.apply(&move |z0, n| scalar::tower_root4_ref(z0, r0, n))
    }

    pub fn max_norm(&self) -> f64 {
        self.c.iter().map(|a| a.max_norm()).fold(0.0, f64::max)
    }

    /// Re-embed into a larger shape, sending variable i to `var_map[i]`.
    pub fn embed(&self, target: &Arc<Shape>, var_map: &[usize]) -> Jet<C> {
        assert!(target.order >= self.shape.order);
        let mut c = vec![C::zero(); target.len()];
        for i in 0..self.shape.len() {
            if self.shape.deg[i] as usize > self.valid {
                continue;
            }
            let src = &self.shape.midx[i];
            let mut dst = [0usize; MAX_VARS];
            for v in 0..self.shape.nv {
                dst[var_map[v]] += src[v] as usize;
            }
            let k = target.index_of(&dst[..target.nv]).expect("embed overflow");
            c[k] = self.c[i].clone();
        }
        Jet {
            shape: target.clone(),
            valid: self.valid.min(target.order),
            c,
        }
    }
}

impl Jet<crate::scalar::TP> {
    /// Spatial jet of the value slice (time-expansion coefficient 0).
    pub fn t_value(&self) -> Jet<C64> {
        self.slice(|tp| tp.value())
    }

    /// Spatial jet of the first time derivative.
    pub fn t_d1(&self) -> Jet<C64> {
        self.slice(|tp| tp.d1())
    }

    /// Spatial jet of the second time derivative.
    pub fn t_d2(&self) -> Jet<C64> {
        self.slice(|tp| tp.d2())
    }

    fn slice(&self, f: impl Fn(&crate::scalar::TP) -> C64) -> Jet<C64> {
        Jet {
            shape: self.shape.clone(),
            valid: self.valid,
            c: self.c.iter().map(f).collect(),
        }
    }
}

/// Evaluate a scalar field with jet-valued inputs about `base`.
pub fn jet_lift<F>(f: F, base: &[f64], nv: usize, order: usize) -> Result<Jet<C64>>
where
    F: Fn(&[Jet<C64>]) -> Result<Jet<C64>>,
{
    assert_eq!(base.len(), nv);
    let sh = shape(nv, order);
    let vars: Vec<Jet<C64>> = (0..nv)
        .map(|v| Jet::variable(&sh, v, C64::new(base[v], 0.0)))
        .collect();
    f(&vars)
}

/// d^alpha f = alpha! * coefficient(alpha).
pub fn extract_derivative<C: Coeff>(j: &Jet<C>, alpha: &[usize]) -> Result<C64> {
    let total: usize = alpha.iter().sum();
    if total > j.valid {
        return Err(WfError::OrderExceeded {
            requested: total,
            order: j.valid,
        });
    }
    let idx = j
        .shape
        .index_of(alpha)
        .ok_or(WfError::OrderExceeded {
            requested: total,
            order: j.shape.order,
        })?;
    let mut fact = 1.0;
    for &a in alpha {
        for k in 2..=a {
            fact *= k as f64;
        }
    }
    Ok(j.c[idx].abs_const() * fact)
}

// Field over jets lets the geometric closed forms run unchanged at jet inputs.
impl<C: Coeff> Field for Jet<C> {
    fn lift(&self, x: f64) -> Self {
        Jet::constant(&self.shape, C::from_c64(C64::new(x, 0.0)))
    }
    fn add(&self, o: &Self) -> Self {
        Jet::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Jet::sub(self, o)
    }
    fn neg(&self) -> Self {
        Jet::neg(self)
    }
    fn mul(&self, o: &Self) -> Self {
        Jet::mul(self, o)
    }
    fn div(&self, o: &Self) -> Self {
        Jet::div(self, o).expect("jet division by zero constant term")
    }
    fn scale(&self, s: f64) -> Self {
        Jet::scale(self, s)
    }
    fn sqrt(&self) -> Self {
        Jet::sqrt(self).expect("jet sqrt at zero")
    }
    fn sin(&self) -> Self {
        self.apply(&scalar::tower_sin).unwrap()
    }
    fn cos(&self) -> Self {
        self.apply(&scalar::tower_cos).unwrap()
    }
    fn sinh(&self) -> Self {
        self.apply(&scalar::tower_sinh).unwrap()
    }
    fn cosh(&self) -> Self {
        self.apply(&scalar::tower_cosh).unwrap()
    }
    fn exp(&self) -> Self {
        Jet::exp(self).expect("jet exp")
    }
    fn recip(&self) -> Self {
        Jet::recip(self).expect("jet reciprocal of zero constant term")
    }
    fn re_const(&self) -> f64 {
        self.value().re
    }
}
