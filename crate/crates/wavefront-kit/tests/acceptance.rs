//! Acceptance suite: every numbered criterion of the artifact runs here at
//! its stated tolerance and prints one PASS line with the measured margins.
//! Tolerances are pinned as constants next to each criterion.

use std::f64::consts::PI;
use std::time::Instant;

use wavefront_kit::geometry::{MetricModel, quad_form};
use wavefront_kit::kernel::{KernelRequest, SpectralReference, kernel_oscillatory, kernel_spectral};
use wavefront_kit::scalar::c64;
use wavefront_kit::{caustics, flow, phase, spectral, symbolcalc};

fn sphere() -> MetricModel {
    MetricModel::sphere(1.0)
}
fn hyper() -> MetricModel {
    MetricModel::hyperbolic(1.0)
}
fn torus() -> MetricModel {
    MetricModel::flat_torus(2.0 * PI, 2.0 * PI)
}

fn report(n: usize, what: &str, detail: &str, t: Instant) {
    println!(
        "PASS criterion {n:2} — {what}: {detail} ({:.2} s)",
        t.elapsed().as_secs_f64()
    );
}

/// Deterministic uniform samples in [-0.5, 0.5).
struct Lcg(u64);
impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    }
}

// -- 1 -----------------------------------------------------------------------

const FLOW_CHART_TOL: f64 = 1e-9;
const FLOW_ENERGY_TOL: f64 = 1e-10;

#[test]
fn criterion_01_flow_golden_tests() {
    let clock = Instant::now();
    let mut max_err: f64 = 0.0;
    let mut max_drift: f64 = 0.0;
    // sphere from the chart origin: x* = 2 tan(t/2) eta_hat, xi* = cos^2(t/2) eta
    let m = sphere();
    let eta = [0.6, -0.8];
    for k in 0..=95 {
        let t = 2.0 * PI * k as f64 / 95.0;
        let s = flow::flow_state(&m, [0.0, 0.0], eta, t).unwrap();
        let tan = 2.0 * (t / 2.0).tan();
        let c2 = (t / 2.0).cos().powi(2);
        for a in 0..2 {
            max_err = max_err.max((s.x_star[a] - tan * eta[a]).abs());
            max_err = max_err.max((s.xi_star[a] - c2 * eta[a]).abs());
        }
        let h = flow::hamiltonian(&m, s.x_star, s.xi_star).unwrap();
        max_drift = max_drift.max((h - 1.0).abs());
    }
    // hyperbolic plane: x* = sinh(t) eta_hat, xi* = eta / cosh(t)
    let mh = hyper();
    let eta = [0.28, 0.96];
    for k in 0..=95 {
        let t = 2.0 * PI * k as f64 / 95.0;
        let s = flow::flow_state(&mh, [0.0, 0.0], eta, t).unwrap();
        for a in 0..2 {
            max_err = max_err.max((s.x_star[a] - t.sinh() * eta[a]).abs());
            max_err = max_err.max((s.xi_star[a] - eta[a] / t.cosh()).abs());
        }
        let h = flow::hamiltonian(&mh, s.x_star, s.xi_star).unwrap();
        max_drift = max_drift.max((h - 1.0).abs());
    }
    assert!(max_err <= FLOW_CHART_TOL, "chart error {max_err:.3e}");
    assert!(max_drift <= FLOW_ENERGY_TOL, "energy drift {max_drift:.3e}");
    assert!(clock.elapsed().as_secs_f64() < 1.0, "runtime budget");
    report(
        1,
        "flow golden tests",
        &format!("max chart err {max_err:.2e}, energy drift {max_drift:.2e}"),
        clock,
    );
}

// -- 2 -----------------------------------------------------------------------

const WEIGHT_TOL: f64 = 1e-8;

#[test]
fn criterion_02_weight_scalar_identities_and_branch() {
    let clock = Instant::now();
    let mut worst: f64 = 0.0;
    for eps in [0.0, 0.5, 1.0] {
        for k in 0..=95 {
            let t = 2.0 * PI * k as f64 / 95.0;
            let m = sphere();
            let s = flow::flow_state(&m, [0.0, 0.0], [1.0, 0.4], t).unwrap();
            let v = phase::weight_scalar_part(&m, [0.0, 0.0], &s, eps).unwrap();
            worst = worst.max((v - c64(t.cos(), -eps * t.sin())).norm());
            // hyperbolic: cosh t - i eps sinh t. The epsilon sign follows the
            // on-flow phixeta formula and the jet route (both to 1e-7); the
            // closed-form display this reproduces is stated there with the
            // opposite sign, which contradicts that formula.
            let mh = hyper();
            let s = flow::flow_state(&mh, [0.0, 0.0], [0.7, -0.7], t).unwrap();
            let v = phase::weight_scalar_part(&mh, [0.0, 0.0], &s, eps).unwrap();
            worst = worst.max((v - c64(t.cosh(), -eps * t.sinh())).norm());
        }
    }
    assert!(worst <= WEIGHT_TOL, "scalar identity error {worst:.3e}");
    // the real-phase branch degenerates at the first sphere caustic
    let mut tracker = phase::BranchTracker::new([0.0, 0.0], [1.0, 0.0], 0.0);
    let err = tracker.arg_at(&sphere(), 2.0);
    let degenerate_at = match err {
        Err(wavefront_kit::WfError::BranchDegenerate(t)) => t,
        other => panic!("expected BranchDegenerate, got {other:?}"),
    };
    assert!((degenerate_at - PI / 2.0).abs() < 0.1);
    assert!(clock.elapsed().as_secs_f64() < 1.0, "runtime budget");
    report(
        2,
        "weight scalar identities + real-phase degeneracy",
        &format!("max err {worst:.2e}, eps=0 branch fails at t={degenerate_at:.3}"),
        clock,
    );
}

// -- 3 -----------------------------------------------------------------------

#[test]
fn criterion_03_maslov_great_circle() {
    let clock = Instant::now();
    for eps in [0.5, 1.0, 2.0] {
        let idx = caustics::maslov_index(&sphere(), [0.0, 0.0], [1.0, 0.0], 2.0 * PI, eps, 64)
            .unwrap();
        assert_eq!(idx, 2, "eps={eps}");
    }
    assert!(clock.elapsed().as_secs_f64() < 1.0, "runtime budget");
    report(3, "Maslov index of the great circle", "index = 2 for eps in {0.5, 1, 2}", clock);
}

// -- 4 -----------------------------------------------------------------------

const DISPLAY_TOL: f64 = 1e-6;

#[test]
fn criterion_04_amplitude_to_symbol_displays() {
    let clock = Instant::now();
    let mut worst: f64 = 0.0;
    for &t in &[0.2, 0.7, 1.3, 2.9] {
        // sphere, eps = 1
        let (s2, s1, s0) =
            symbolcalc::transport_terms(&sphere(), [0.0, 0.0], [1.0, 0.0], 1.0, t).unwrap();
        let e2 = c64(0.0, 2.0 * t).exp();
        let e4 = c64(0.0, 4.0 * t).exp();
        worst = worst.max((s2 - (e2 * 2.0 + e4 - 3.0) * 0.25).norm());
        worst = worst.max((s1 - (-e2 * 4.0 - e4 * 3.0 + 7.0) / 6.0).norm());
        worst = worst.max((s0 - (e2 - 8.0) / 12.0).norm());
        // hyperbolic plane, eps = 0
        let (s2, s1, s0) =
            symbolcalc::transport_terms(&hyper(), [0.0, 0.0], [0.6, 0.8], 0.0, t).unwrap();
        let sech2 = 1.0 / (t.cosh() * t.cosh());
        let want2 = c64(-(2.0 / 3.0) * (2.0 + (2.0 * t).cosh()) * sech2, 0.0);
        worst = worst.max((s2 - want2).norm());
        worst = worst.max((s1 + want2).norm());
        worst = worst.max((s0 - c64((3.0 + sech2) / 12.0, 0.0)).norm());
    }
    assert!(worst <= DISPLAY_TOL, "display error {worst:.3e}");
    assert!(clock.elapsed().as_secs_f64() < 10.0, "runtime budget");
    report(
        4,
        "six amplitude-to-symbol displays",
        &format!("max abs err {worst:.2e} at t in {{0.2, 0.7, 1.3, 2.9}}"),
        clock,
    );
}

// -- 5 -----------------------------------------------------------------------

const SUBPRINCIPAL_TOL: f64 = 1e-6;

#[test]
fn criterion_05_subprincipal_symbol_quadrature() {
    let clock = Instant::now();
    let ts = [0.5, 1.0, 1.7, 2.4, 3.0];
    let mut worst: f64 = 0.0;
    // sphere, general-eps closed form
    for eps in [0.5, 1.0] {
        let vals =
            symbolcalc::subprincipal_on_grid(&sphere(), [0.0, 0.0], [1.0, 0.0], eps, &ts, 1e-9, 0.0)
                .unwrap();
        for (i, &t) in ts.iter().enumerate() {
            let s2 = (2.0 * t).sin();
            let s = t.sin();
            let num = c64(6.0 * eps.powi(3) * s * s - 4.0 * eps * s * s, s2 + 3.0 * eps * eps * s2);
            let den = c64(t.cos(), -eps * s);
            let want = c64(0.0, t / 8.0) + num / (den * den * 48.0);
            worst = worst.max((vals[i] - want).norm());
        }
    }
    // hyperbolic plane, eps = 0
    let vals =
        symbolcalc::subprincipal_on_grid(&hyper(), [0.0, 0.0], [1.0, 0.0], 0.0, &ts, 1e-9, 0.0)
            .unwrap();
    for (i, &t) in ts.iter().enumerate() {
        let want = c64(0.0, -(3.0 * t + t.tanh()) / 24.0);
        worst = worst.max((vals[i] - want).norm());
    }
    // initial condition
    let zero = symbolcalc::subprincipal_symbol(&sphere(), [0.0, 0.0], [1.0, 0.0], 1.0, 0.0, 1e-9)
        .unwrap();
    assert!(zero.norm() <= 1e-9, "a_-1(0) = {zero}");
    assert!(worst <= SUBPRINCIPAL_TOL, "subprincipal error {worst:.3e}");
    assert!(clock.elapsed().as_secs_f64() < 30.0, "runtime budget");
    report(
        5,
        "subprincipal symbol by transport quadrature",
        &format!("max err {worst:.2e} over t in [0, 3], a_-1(0) = {:.1e}", zero.norm()),
        clock,
    );
}

// -- 6 -----------------------------------------------------------------------

const SMALL_TIME_REL_TOL: f64 = 1e-4;
const SMALL_TIME_FLAT_ABS: f64 = 1e-8;

#[test]
fn criterion_06_small_time_law() {
    let clock = Instant::now();
    let cs = symbolcalc::small_time_coefficient(&sphere(), [0.0, 0.0], [2.0, 0.0]).unwrap();
    let want_s = c64(0.0, 2.0 / (12.0 * 2.0));
    let rel_s = (cs - want_s).norm() / want_s.norm();
    assert!(rel_s <= SMALL_TIME_REL_TOL, "sphere rel err {rel_s:.3e}");
    let ch = symbolcalc::small_time_coefficient(&hyper(), [0.0, 0.0], [1.0, 0.0]).unwrap();
    let want_h = c64(0.0, -2.0 / 12.0);
    let rel_h = (ch - want_h).norm() / want_h.norm();
    assert!(rel_h <= SMALL_TIME_REL_TOL, "hyperbolic rel err {rel_h:.3e}");
    let ct = symbolcalc::small_time_coefficient(&torus(), [1.0, 1.0], [1.0, 0.0]).unwrap();
    assert!(ct.norm() <= SMALL_TIME_FLAT_ABS, "torus coefficient {ct}");
    assert!(clock.elapsed().as_secs_f64() < 10.0, "runtime budget");
    report(
        6,
        "small-time law i R t / (12 h)",
        &format!("rel err sphere {rel_s:.2e}, hyperbolic {rel_h:.2e}, torus |c| {:.1e}", ct.norm()),
        clock,
    );
}

// -- 7 -----------------------------------------------------------------------

const IDENTITY_TOL: f64 = 1e-10;

/// Values of the d = 2 identity-symbol series at eps = h = 1, as exact
/// rationals, frozen from an exact-fraction run of the series oracle below
/// (the in-test oracle re-derives them in floating point to 1e-12).
const FROZEN_TABLE: [(usize, f64, f64); 7] = [
    (4, -3.0, 8.0),
    (5, 21.0, 8.0),
    (6, -83.0, 4.0),
    (7, 26685.0, 128.0),
    (8, -317553.0, 128.0),
    (9, 17594311.0, 512.0),
    (10, -69475263.0, 128.0),
];

mod series_oracle {
    //! Independent check of the identity-symbol series procedure: functions
    //! are sums P(eta) |eta|^e with polynomial P, a class closed under
    //! differentiation, evaluated at the rational circle point (3/5, 4/5).
    //! Shares no code with the jet implementation.
    use std::collections::HashMap;

    type Poly = HashMap<(u32, u32), f64>;
    type Func = HashMap<i32, Poly>;

    fn padd(a: &mut Poly, b: &Poly, s: f64) {
        for (k, v) in b {
            *a.entry(*k).or_insert(0.0) += v * s;
        }
    }

    fn fd(f: &Func, i: usize) -> Func {
        let mut out: Func = HashMap::new();
        for (&e, p) in f {
            let mut dp: Poly = HashMap::new();
            for (&(a, b), &v) in p {
                let k = if i == 0 { a } else { b };
                if k > 0 {
                    let m = if i == 0 { (a - 1, b) } else { (a, b - 1) };
                    *dp.entry(m).or_insert(0.0) += v * k as f64;
                }
            }
            if !dp.is_empty() {
                padd(out.entry(e).or_default(), &dp, 1.0);
            }
            if e != 0 {
                let mut ei: Poly = HashMap::new();
                for (&(a, b), &v) in p {
                    let m = if i == 0 { (a + 1, b) } else { (a, b + 1) };
                    *ei.entry(m).or_insert(0.0) += v * e as f64;
                }
                padd(out.entry(e - 2).or_default(), &ei, 1.0);
            }
        }
        out
    }

    fn feval(f: &Func, e1: f64, e2: f64) -> f64 {
        // at |eta| = 1 the radial power drops out
        let mut tot = 0.0;
        for p in f.values() {
            for (&(a, b), &v) in p {
                tot += v * e1.powi(a as i32) * e2.powi(b as i32);
            }
        }
        tot
    }

    fn binom(n: usize, k: usize) -> f64 {
        (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product()
    }

    fn dop(m: usize, j: usize, q: i32, e1: f64, e2: f64) -> f64 {
        let mut total = 0.0;
        for u in 0..=m {
            for v in 0..=j {
                let a = 2 * u + v;
                let b = 2 * (m - u) + (j - v);
                let c = binom(m, u) * binom(j, v);
                let mut p: Poly = HashMap::new();
                p.insert((v as u32, (j - v) as u32), c);
                let mut f: Func = HashMap::new();
                f.insert(q, p);
                for _ in 0..a {
                    f = fd(&f, 0);
                }
                for _ in 0..b {
                    f = fd(&f, 1);
                }
                total += feval(&f, e1, e2);
            }
        }
        total
    }

    /// s_0..s_kmax at eps = h = 1; all values are real.
    pub fn table(kmax: usize) -> Vec<f64> {
        let (e1, e2) = (0.6, 0.8);
        let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>().max(1.0);
        let binom_half = |j: usize| -> f64 {
            (0..j).map(|i| (0.5 - i as f64) / (i as f64 + 1.0)).product()
        };
        // i^n for even powers of i collapsing to real signs: track re/im
        let ipow = |n: usize| -> (f64, f64) {
            [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][n % 4]
        };
        let mut s = vec![(0.0, 0.0); kmax + 1];
        s[0] = (1.0, 0.0);
        for lev in 1..=kmax {
            let mut acc = (0.0, 0.0);
            for m in 0..=lev {
                for j in 0..=(lev - m) {
                    if m + j == 0 {
                        continue;
                    }
                    let l = lev - m - j;
                    if s[l] == (0.0, 0.0) {
                        continue;
                    }
                    let alpha = (-0.5f64).powi(m as i32) / fact(m);
                    let (br, bi) = ipow(j);
                    let beta = (binom_half(j) * br, binom_half(j) * bi);
                    let d = dop(m, j, m as i32 - j as i32 - l as i32, e1, e2);
                    let (ir, ii) = ipow(2 * m + j);
                    let z = (ir * beta.0 - ii * beta.1, ir * beta.1 + ii * beta.0);
                    let z = (
                        z.0 * s[l].0 - z.1 * s[l].1,
                        z.0 * s[l].1 + z.1 * s[l].0,
                    );
                    acc.0 += alpha * d * z.0;
                    acc.1 += alpha * d * z.1;
                }
            }
            s[lev] = (-acc.0, -acc.1);
        }
        s.into_iter().map(|(re, _)| re).collect()
    }
}

#[test]
fn criterion_07_identity_symbol_table() {
    let clock = Instant::now();
    // the in-test oracle (floating point) must reproduce the frozen exact
    // rationals up to its own roundoff
    let oracle = series_oracle::table(10);
    for &(k, num, den) in &FROZEN_TABLE {
        let want = num / den;
        assert!(
            (oracle[k] - want).abs() <= 1e-8 * want.abs().max(1.0),
            "oracle self-check k={k}: {} vs {want}",
            oracle[k]
        );
    }
    // values the procedure shares with the source table (k <= 3); beyond
    // k = 3 the printed source list disagrees with its own algorithm, so the
    // higher orders are pinned to the independent oracle (see README).
    let shared = [1.0, 0.0, 0.0, 0.125];
    let mut worst: f64 = 0.0;
    for (k, &want) in shared.iter().enumerate() {
        let v = symbolcalc::identity_symbol(2, 1.0, k, 1.0).unwrap();
        worst = worst.max((v - c64(want, 0.0)).norm());
        assert!((oracle[k] - want).abs() <= 1e-10);
    }
    for &(k, num, den) in &FROZEN_TABLE {
        let v = symbolcalc::identity_symbol(2, 1.0, k, 1.0).unwrap();
        let want = num / den;
        let rel = (v - c64(want, 0.0)).norm() / want.abs().max(1.0);
        assert!(rel <= IDENTITY_TOL, "k={k}: {v} vs {want}");
        worst = worst.max(rel);
    }
    // exact rational multiples of (eps/h)^k
    for &(k, num, den) in &FROZEN_TABLE {
        let v = symbolcalc::identity_symbol(2, 0.7, k, 1.3).unwrap();
        let want = num / den * (0.7f64 / 1.3).powi(k as i32);
        assert!(
            (v - c64(want, 0.0)).norm() <= IDENTITY_TOL * want.abs().max(1.0),
            "scaling at k={k}"
        );
    }
    let v3 = symbolcalc::identity_symbol(2, 0.7, 3, 1.3).unwrap();
    let want3 = 0.125 * (0.7f64 / 1.3).powi(3);
    assert!((v3 - c64(want3, 0.0)).norm() <= IDENTITY_TOL);
    // general-d sub-subleading value
    for d in [2usize, 3, 4] {
        let v = symbolcalc::identity_symbol(d, 1.0, 2, 1.0).unwrap();
        let want = ((d - 1) * (d - 2)) as f64 / 8.0;
        assert!((v - c64(want, 0.0)).norm() <= IDENTITY_TOL, "d={d}");
    }
    assert!(clock.elapsed().as_secs_f64() < 10.0, "runtime budget");
    report(
        7,
        "identity-operator symbols by series procedure",
        &format!(
            "k<=3 match the source table (err {worst:.1e}); k=4..10 match the \
             independent exact oracle (s_-4 = -3/8, s_-5 = 21/8, ...), which \
             deviates from the printed source list"
        ),
        clock,
    );
}

// -- 8 -----------------------------------------------------------------------

const FTE_TOL: f64 = 1e-6;

#[test]
fn criterion_08_first_transport_equation_residual() {
    let clock = Instant::now();
    let mut rng = Lcg(0x5eed_cafe);
    let mut worst: f64 = 0.0;
    for m in [sphere(), hyper(), torus()] {
        for _ in 0..20 {
            let t = 0.15 + 2.6 * (rng.next() + 0.5);
            let eta = [1.0 + rng.next(), 1.2 * rng.next()];
            let eps = 0.3 + 1.2 * (rng.next() + 0.5);
            let y = match m.kind {
                wavefront_kit::ModelKind::FlatTorus2 { .. } => [1.0, 1.0],
                _ => [0.2 * rng.next(), 0.2 * rng.next()],
            };
            let r = symbolcalc::fte_residual(&m, y, eta, eps, t).unwrap().norm();
            assert!(r <= FTE_TOL, "{:?} t={t} eps={eps}: residual {r:.3e}", m.kind);
            worst = worst.max(r);
        }
    }
    assert!(clock.elapsed().as_secs_f64() < 30.0, "runtime budget");
    report(
        8,
        "first transport equation residual",
        &format!("max |residual| {worst:.2e} over 20 random samples per model"),
        clock,
    );
}

// -- 9 -----------------------------------------------------------------------

const PQ_TABLE_TOL: f64 = 1e-8;
const PQ_RELATION_TOL: f64 = 1e-7;

#[test]
fn criterion_09_position_momentum_forms() {
    let clock = Instant::now();
    let m = sphere();
    let eta = [0.8, 0.6];
    let mut worst_table: f64 = 0.0;
    for k in 1..40 {
        let t = 0.07 * k as f64;
        let s = flow::flow_state(&m, [0.0, 0.0], eta, t).unwrap();
        let f = caustics::pq_forms(&m, &s, [0.0, 0.0]).unwrap();
        worst_table = worst_table.max(caustics::det2(&f.q_form).abs());
        worst_table =
            worst_table.max((caustics::det2(&f.p_form) - t.cos() * t.cos()).abs());
        for a in 0..2 {
            for b in 0..2 {
                let delta = if a == b { 1.0 } else { 0.0 };
                worst_table =
                    worst_table.max((f.q_form[a][b] + f.p_form[a][b] - delta).abs());
            }
        }
    }
    assert!(worst_table <= PQ_TABLE_TOL, "sphere table err {worst_table:.3e}");
    // phixeta = g (p - i eps h q) against the direct on-flow formula
    let mut rng = Lcg(0x9e37_79b9);
    let mut worst_rel: f64 = 0.0;
    for model in [sphere(), hyper()] {
        for _ in 0..40 {
            let y = [0.4 * rng.next(), 0.4 * rng.next()];
            let eta = [1.0 + 0.8 * rng.next(), rng.next()];
            let t = 0.1 + 2.5 * (rng.next() + 0.5);
            let eps = 0.4 + (rng.next() + 0.5);
            let s = flow::flow_state(&model, y, eta, t).unwrap();
            let f = caustics::pq_forms(&model, &s, y).unwrap();
            let rec = caustics::phi_xeta_from_pq(&model, &s, &f, eps).unwrap();
            let direct = phase::phi_x_eta_on_flow(&model, &s, eps).unwrap();
            for a in 0..2 {
                for b in 0..2 {
                    worst_rel = worst_rel.max((rec[a][b] - direct[a][b]).norm());
                }
            }
            // positive definiteness of a h^2 Q + b P
            let h = flow::hamiltonian(&model, y, eta).unwrap();
            for aa in [0.1, 1.0, 10.0] {
                for bb in [0.1, 1.0, 10.0] {
                    let mut comb = [[0.0; 2]; 2];
                    for i in 0..2 {
                        for j in 0..2 {
                            comb[i][j] = aa * h * h * f.q_form[i][j] + bb * f.p_form[i][j];
                        }
                    }
                    assert!(caustics::det2(&comb) > 0.0 && comb[0][0] > 0.0);
                    let v = [rng.next(), rng.next()];
                    assert!(quad_form(&comb, &v, &v) >= 0.0);
                }
            }
        }
    }
    assert!(worst_rel <= PQ_RELATION_TOL, "relation err {worst_rel:.3e}");
    assert!(clock.elapsed().as_secs_f64() < 10.0, "runtime budget");
    report(
        9,
        "position/momentum forms",
        &format!(
            "sphere table err {worst_table:.2e}, phixeta relation err {worst_rel:.2e}, \
             positive-definiteness sweep clean"
        ),
        clock,
    );
}

// -- 10 ----------------------------------------------------------------------

const QUARTER_PERIOD_TOL: f64 = 1e-6;

#[test]
fn criterion_10_quarter_shift_periodicity() {
    let clock = Instant::now();
    let m = sphere();
    let mut worst: f64 = 0.0;
    for &t in &[0.4, 1.1] {
        let ts = [t, t + 2.0 * PI];
        let vals =
            symbolcalc::subprincipal_on_grid(&m, [0.0, 0.0], [1.0, 0.0], 1.0, &ts, 1e-9, 0.25)
                .unwrap();
        worst = worst.max((vals[1] - vals[0]).norm());
    }
    assert!(worst <= QUARTER_PERIOD_TOL, "period defect {worst:.3e}");
    assert!(clock.elapsed().as_secs_f64() < 60.0, "runtime budget");
    report(
        10,
        "quarter-shifted subprincipal symbol is 2 pi periodic",
        &format!("max |a(t + 2 pi) - a(t)| = {worst:.2e}"),
        clock,
    );
}

// -- 11 ----------------------------------------------------------------------

const KERNEL_REL_TOL: f64 = 0.03;

#[test]
fn criterion_11_kernel_cross_check() {
    let clock = Instant::now();
    let m = sphere();
    let reference = SpectralReference::auto(1.0, 30.0, false);
    let mut worst: f64 = 0.0;
    for &t in &[0.4f64, 0.9] {
        // x on the geodesic front issued from the origin
        let x = [2.0 * (t / 2.0).tan(), 0.0];
        let mut req = KernelRequest::new(t, x, [0.0, 0.0]);
        req.eps = 1.0;
        req.symbol_depth = 1;
        req.regulator_scale = 30.0;
        let osc = kernel_oscillatory(&m, &req).unwrap();
        let spec = kernel_spectral(&m, &reference, t, x, [0.0, 0.0], 30.0).unwrap();
        let rel = (osc - spec).norm() / spec.norm();
        println!(
            "    kernel t={t}: osc = {osc:.6}, spec = {spec:.6}, rel = {rel:.4}"
        );
        assert!(rel <= KERNEL_REL_TOL, "t={t}: relative error {rel:.4}");
        worst = worst.max(rel);
    }
    assert!(clock.elapsed().as_secs_f64() < 120.0, "runtime budget");
    report(
        11,
        "oscillatory vs spectral kernel on the sphere",
        &format!("max relative error {worst:.4} at R=30, depth 1"),
        clock,
    );
}

// -- 12 ----------------------------------------------------------------------

#[test]
fn criterion_12_weyl_asymptotics_and_heat_trace() {
    let clock = Instant::now();
    let c1 = spectral::weyl_coefficients(2, 2.0).c_dm1;
    let lams = [50.0, 100.0, 150.0, 200.0];
    let vals = spectral::mollified_counting_derivative(240, &lams, 2.0).unwrap();
    let mut worst_ratio: f64 = 0.0;
    for (i, &lam) in lams.iter().enumerate() {
        let ratio = vals[i] / (c1 * lam);
        assert!((0.98..=1.02).contains(&ratio), "lambda={lam}: ratio {ratio}");
        worst_ratio = worst_ratio.max((ratio - 1.0).abs());
    }
    // fitted constant term (least squares over [150, 200]) is small: c_0 = 0
    let fit_l: Vec<f64> = (0..=10).map(|k| 150.0 + 5.0 * k as f64).collect();
    let fit_v = spectral::mollified_counting_derivative(240, &fit_l, 2.0).unwrap();
    let n = fit_l.len() as f64;
    let (sx, sy): (f64, f64) = (fit_l.iter().sum(), fit_v.iter().sum());
    let sxx: f64 = fit_l.iter().map(|x| x * x).sum();
    let sxy: f64 = fit_l.iter().zip(&fit_v).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    assert!(
        intercept.abs() <= 1e-2 * c1 * 200.0,
        "fitted constant {intercept:.3e}"
    );
    // heat traces at t = 0.01
    let res_s = spectral::heat_trace_check(&sphere(), &[0.01]).unwrap()[0];
    assert!(res_s.abs() <= 0.01, "sphere heat residual {res_s:.3e}");
    let res_t = spectral::heat_trace_check(&torus(), &[0.01]).unwrap()[0];
    assert!(res_t.abs() <= 1e-10, "torus heat residual {res_t:.3e}");
    let res_h = spectral::heat_trace_check(&hyper(), &[0.01]).unwrap()[0];
    assert!(res_h.abs() <= 0.01, "hyperbolic heat residual {res_h:.3e}");
    assert!(clock.elapsed().as_secs_f64() < 30.0, "runtime budget");
    report(
        12,
        "Weyl asymptotics and heat traces",
        &format!(
            "counting ratio within {worst_ratio:.4} of 1, fitted c0 = {intercept:.2e}, \
             heat residuals (S2 {res_s:.2e}, T2 {res_t:.1e}, H2 {res_h:.2e})"
        ),
        clock,
    );
}
