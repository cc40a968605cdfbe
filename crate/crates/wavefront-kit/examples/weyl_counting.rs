//! Mollified derivative of the local counting function on the sphere against
//! the leading Weyl term c_1 lambda, plus heat-trace residuals.
//!
//!   cargo run --release --example weyl_counting

use wavefront_kit::{MetricModel, spectral};

fn main() {
    let c1 = spectral::weyl_coefficients(2, 2.0).c_dm1;
    println!("c_1 = S_1/(2 pi)^2 = {c1:.10} (= 1/(2 pi))");
    let lams: Vec<f64> = (1..=8).map(|k| 25.0 * k as f64).collect();
    let vals = spectral::mollified_counting_derivative(260, &lams, 2.0).unwrap();
    println!("{:>8} {:>14} {:>14} {:>10}", "lambda", "N'*mu", "c1 lambda", "ratio");
    for (i, &lam) in lams.iter().enumerate() {
        println!(
            "{lam:8.1} {:14.6} {:14.6} {:10.6}",
            vals[i],
            c1 * lam,
            vals[i] / (c1 * lam)
        );
    }
    println!("\nheat-trace residuals against (4 pi t)^-1 (1 + R t/6) at t = 0.01:");
    for (name, m) in [
        ("sphere", MetricModel::sphere(1.0)),
        ("flat torus", MetricModel::flat_torus(2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI)),
        ("hyperbolic", MetricModel::hyperbolic(1.0)),
    ] {
        let r = spectral::heat_trace_check(&m, &[0.01]).unwrap()[0];
        println!("  {name:12} relative residual {r:+.3e}");
    }
}
