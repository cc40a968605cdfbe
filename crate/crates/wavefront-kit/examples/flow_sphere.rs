//! Integrate the cogeodesic flow on the round sphere and compare against the
//! closed-form great-circle solution from the chart origin.
//!
//!   cargo run --release --example flow_sphere

use wavefront_kit::{MetricModel, flow};

fn main() {
    let model = MetricModel::sphere(1.0);
    let y = [0.0, 0.0];
    let eta = [0.6, -0.8]; // unit covector
    println!("{:>6} {:>12} {:>12} {:>12} {:>12} {:>10}", "t", "x1", "x2", "xi1", "xi2", "err");
    let mut worst: f64 = 0.0;
    for k in 0..=24 {
        let t = 2.0 * std::f64::consts::PI * k as f64 / 25.0;
        let s = flow::flow_state(&model, y, eta, t).unwrap();
        let tan = 2.0 * (t / 2.0).tan();
        let c2 = (t / 2.0).cos().powi(2);
        let err = (0..2)
            .map(|a| {
                (s.x_star[a] - tan * eta[a])
                    .abs()
                    .max((s.xi_star[a] - c2 * eta[a]).abs())
            })
            .fold(0.0f64, f64::max);
        worst = worst.max(err);
        println!(
            "{t:6.3} {:12.6} {:12.6} {:12.6} {:12.6} {err:10.2e}",
            s.x_star[0], s.x_star[1], s.xi_star[0], s.xi_star[1]
        );
    }
    println!("\nmax deviation from the closed-form flow: {worst:.3e}");

    // returns to the start every 2 pi, focused each time
    let loops = flow::loop_detect(&model, y, eta, 13.0).unwrap();
    for (t, conj) in loops {
        println!("loop at T = {t:.9} (focused return: {conj})");
    }
}
