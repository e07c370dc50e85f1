//! Infidelity of a simple and a BB1-corrected pi pulse across amplitude errors.
//!
//! Run with `cargo run --example fidelity_scan`.

use std::f64::consts::PI;

use bb1spin::analysis::{scan_order, ScanTarget};

fn main() -> bb1spin::Result<()> {
    let (bb1, bb1_slope) = scan_order(PI, (1e-2, 0.3), 12, ScanTarget::Bb1)?;
    let (simple, simple_slope) = scan_order(PI, (1e-2, 0.3), 12, ScanTarget::Simple)?;

    println!("{:>10} {:>14} {:>14}", "epsilon", "simple 1-F", "BB1 1-F");
    for (s, b) in simple.points.iter().zip(&bb1.points) {
        println!("{:>10.4} {:>14.4e} {:>14.4e}", s.epsilon, s.infidelity, b.infidelity);
    }
    println!("log-log slopes: simple {simple_slope:.3}, BB1 {bb1_slope:.3}");
    Ok(())
}
