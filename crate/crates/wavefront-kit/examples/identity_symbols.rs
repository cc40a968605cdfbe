//! Identity-operator symbols at t = 0 by the normal-coordinate series
//! procedure: s_0 = 1, s_-1 = 0, s_-2 = (d-1)(d-2) eps^2/(8 h^2), and the
//! higher d = 2 orders as exact rational multiples of (eps/h)^k.
//!
//!   cargo run --release --example identity_symbols

use wavefront_kit::symbolcalc::identity_symbol;

fn main() {
    println!("d = 2, eps = 1, h = 1:");
    for k in 0..=10 {
        let v = identity_symbol(2, 1.0, k, 1.0).unwrap();
        println!("  s_-{k:<2} = {:+.12}", v.re);
    }
    println!("\ngeneral dimension, k = 2 (analytic: (d-1)(d-2)/8):");
    for d in 2..=4 {
        let v = identity_symbol(d, 1.0, 2, 1.0).unwrap();
        println!("  d = {d}: s_-2 = {:+.12}", v.re);
    }
    println!("\nreal phase (eps = 0) collapses the full symbol to 1:");
    for k in 1..=5 {
        let v = identity_symbol(2, 0.0, k, 1.0).unwrap();
        println!("  s_-{k} = {:+.1}", v.re);
    }
}
