//! Track the weight w = [rho(x) rho(y)]^{-1/2} [det^2 phi_x_eta]^{1/4} along a
//! sphere trajectory through two caustics. With eps = 1 the branch argument
//! decreases linearly and w never vanishes; with eps = 0 the branch hits the
//! first conjugate point at t = pi/2.
//!
//!   cargo run --release --example phase_weight

use wavefront_kit::{MetricModel, WfError, phase};

fn main() {
    let model = MetricModel::sphere(1.0);
    let grid: Vec<f64> = (0..=40).map(|k| 0.15 * k as f64).collect();
    let ws = phase::weight_eval(&model, [0.0, 0.0], [1.0, 0.0], 1.0, &grid).unwrap();
    println!("{:>6} {:>12} {:>12} {:>12}", "t", "Re w", "Im w", "arg det^2");
    for w in &ws {
        println!(
            "{:6.2} {:12.6} {:12.6} {:12.6}",
            w.t, w.value.re, w.value.im, w.branch_arg
        );
    }
    let mut tracker = phase::BranchTracker::new([0.0, 0.0], [1.0, 0.0], 0.0);
    match tracker.arg_at(&model, 2.0) {
        Err(WfError::BranchDegenerate(t)) => {
            println!("\neps = 0: branch degenerates at t = {t:.4} (first caustic)")
        }
        other => println!("unexpected: {other:?}"),
    }
}
