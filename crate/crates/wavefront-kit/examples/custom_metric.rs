//! A conformal metric e^{2f} (du^2 + dv^2) with polynomial f: geodesics by
//! shooting, distances from the Newton-solved inverse exponential, curvature
//! from metric jets, and the Hamiltonian flow by adaptive integration.
//!
//!   cargo run --release --example custom_metric

use wavefront_kit::{MetricModel, flow};

fn main() {
    // f(u, v) = 0.15 u^2 - 0.08 v^2 + 0.1 u v
    let model = MetricModel::conformal(vec![(2, 0, 0.15), (0, 2, -0.08), (1, 1, 0.1)]);
    let p = [0.1, 0.2];
    let q = [0.8, -0.3];
    let d = model.geodesic_distance(p, q).unwrap();
    let v = model.exp_inverse(p, q).unwrap();
    let back = model.exp_map(p, v).unwrap();
    println!("dist(p, q) = {d:.10}");
    println!("exp_p(exp_p^-1(q)) - q = ({:+.2e}, {:+.2e})", back[0] - q[0], back[1] - q[1]);
    let c = model.curvature_at(p).unwrap();
    println!("scalar curvature at p = {:.8}", c.scalar);

    let eta = [0.9, -0.4];
    let h0 = flow::hamiltonian(&model, p, eta).unwrap();
    let states = flow::integrate_flow(&model, p, eta, &[0.5, 1.0, 1.5, 2.0], 1e-12).unwrap();
    println!("\nflow from p with eta = {eta:?}:");
    for s in &states {
        let h = flow::hamiltonian(&model, s.x_star, s.xi_star).unwrap();
        println!(
            "  t = {:.1}: x* = ({:+.6}, {:+.6}), energy drift {:+.1e}",
            s.t,
            s.x_star[0],
            s.x_star[1],
            h / h0 - 1.0
        );
    }
}
