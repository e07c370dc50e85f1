//! Rabi nutation under a Gaussian spread of pulse amplitudes, with and
//! without BB1 correction.
//!
//! Run with `cargo run --example bb1_rabi`.

use std::f64::consts::PI;

use bb1spin::error_model::{Distribution, EnsembleSpec};
use bb1spin::simulator::rabi_trace;

fn main() -> bb1spin::Result<()> {
    let spread = EnsembleSpec::amplitude(Distribution::Gaussian { mean: 0.0, sigma: 0.05 }, 41)?;
    let simple = rabi_trace(40.0 * PI, 0.5 * PI, &spread, false)?;
    let bb1 = rabi_trace(40.0 * PI, 0.5 * PI, &spread, true)?;

    println!("{:>8} {:>10} {:>10}", "angle/pi", "simple", "BB1");
    for (s, b) in simple.samples.iter().zip(&bb1.samples).step_by(8) {
        println!("{:>8.1} {:>10.5} {:>10.5}", s.x / PI, s.value, b.value);
    }
    Ok(())
}
