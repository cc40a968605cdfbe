//! The degree minus-one component of the propagator symbol by transport-
//! equation quadrature, against the closed forms on the sphere (eps = 1) and
//! the hyperbolic plane (eps = 0).
//!
//!   cargo run --release --example subprincipal_symbol

use wavefront_kit::scalar::c64;
use wavefront_kit::{MetricModel, symbolcalc};

fn main() {
    let ts = [0.25, 0.75, 1.5, 2.25, 3.0];
    let sphere = MetricModel::sphere(1.0);
    let vals = symbolcalc::subprincipal_on_grid(&sphere, [0.0, 0.0], [1.0, 0.0], 1.0, &ts, 1e-9, 0.0)
        .unwrap();
    println!("sphere, eps = 1:");
    for (i, &t) in ts.iter().enumerate() {
        let e2 = c64(0.0, 2.0 * t).exp();
        let e4 = c64(0.0, 4.0 * t).exp();
        let want = c64(0.0, t / 8.0) + (e2 * 2.0 + e4 * 3.0 - 5.0) / 96.0;
        println!(
            "  t = {t:5.2}: a_-1 = {:+.8} {:+.8}i   (closed form err {:.1e})",
            vals[i].re,
            vals[i].im,
            (vals[i] - want).norm()
        );
    }
    let hyper = MetricModel::hyperbolic(1.0);
    let vals = symbolcalc::subprincipal_on_grid(&hyper, [0.0, 0.0], [1.0, 0.0], 0.0, &ts, 1e-9, 0.0)
        .unwrap();
    println!("hyperbolic plane, eps = 0:");
    for (i, &t) in ts.iter().enumerate() {
        let want = c64(0.0, -(3.0 * t + t.tanh()) / 24.0);
        println!(
            "  t = {t:5.2}: a_-1 = {:+.8} {:+.8}i   (closed form err {:.1e})",
            vals[i].re,
            vals[i].im,
            (vals[i] - want).norm()
        );
    }
    // the small-time slope recovers i R / (12 h)
    for (name, m, y) in [
        ("sphere", MetricModel::sphere(1.0), [0.0, 0.0]),
        ("hyperbolic", MetricModel::hyperbolic(1.0), [0.0, 0.0]),
        ("torus", MetricModel::flat_torus(6.0, 6.0), [1.0, 1.0]),
    ] {
        let c = symbolcalc::small_time_coefficient(&m, y, [1.0, 0.0]).unwrap();
        println!("small-time coefficient on the {name}: {:+.6} {:+.6}i", c.re, c.im);
    }
}
