//! Maslov index of a great circle: the winding of det^2 phi_x_eta along one
//! traversal gives index 2, independently of the phase parameter eps.
//!
//!   cargo run --release --example maslov_index

use std::f64::consts::PI;
use wavefront_kit::{MetricModel, caustics};

fn main() {
    let model = MetricModel::sphere(1.0);
    for eps in [0.5, 1.0, 2.0] {
        let path = caustics::maslov_path(&model, [0.0, 0.0], [1.0, 0.0], 2.0 * PI, eps, 16).unwrap();
        println!("eps = {eps}: index = {}", path.index);
    }
    let double = caustics::maslov_index(&model, [0.0, 0.0], [0.6, 0.8], 4.0 * PI, 1.0, 64).unwrap();
    println!("two traversals: index = {double}");
    let hyper = MetricModel::hyperbolic(1.0);
    let err = caustics::maslov_index(&hyper, [0.0, 0.0], [1.0, 0.0], 2.0 * PI, 1.0, 16);
    println!("hyperbolic plane: {err:?}");
}
