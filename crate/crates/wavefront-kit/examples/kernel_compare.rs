//! The propagator kernel on the sphere evaluated two ways with the same
//! Gaussian regulator: the global oscillatory integral (depth-one symbol)
//! against the exact spectral sum. The evaluation point rides the wavefront.
//!
//!   cargo run --release --example kernel_compare

use wavefront_kit::MetricModel;
use wavefront_kit::kernel::{KernelRequest, SpectralReference, kernel_oscillatory, kernel_spectral};

fn main() {
    let model = MetricModel::sphere(1.0);
    let regulator = 30.0;
    let reference = SpectralReference::auto(1.0, regulator, false);
    println!("R = {regulator}, l_max = {}", reference.l_max);
    for t in [0.4, 0.9] {
        let x = [2.0 * (t / 2.0_f64).tan(), 0.0]; // on the front
        let mut req = KernelRequest::new(t, x, [0.0, 0.0]);
        req.regulator_scale = regulator;
        let osc = kernel_oscillatory(&model, &req).unwrap();
        let spec = kernel_spectral(&model, &reference, t, x, [0.0, 0.0], regulator).unwrap();
        println!(
            "t = {t}: oscillatory = {:+.5} {:+.5}i, spectral = {:+.5} {:+.5}i, rel err = {:.4}",
            osc.re,
            osc.im,
            spec.re,
            spec.im,
            (osc - spec).norm() / spec.norm()
        );
    }
}
