//! Sensitivity of a BB1 pi pulse to errors in its two correction phases.
//!
//! Run with `cargo run --example phase_errors`.

use std::f64::consts::PI;

use bb1spin::analysis::{bb1_fidelity, phase_sensitivity_prediction, verify_phase_coefficients};

fn main() -> bb1spin::Result<()> {
    let report = verify_phase_coefficients()?;
    println!("{:<16} {:>10} {:>12} {:>10}", "term", "reference", "fitted", "rel dev");
    for row in &report.rows {
        println!(
            "{:<16} {:>10.4} {:>12.6} {:>10.2e}",
            row.name, row.reference, row.fitted, row.relative_deviation
        );
    }

    // offsets typical of a spectrometer with imperfect phase calibration
    let offsets = (0.007 * PI, 0.001 * PI);
    let direct = bb1_fidelity(PI, 0.1, offsets)?;
    let predicted = phase_sensitivity_prediction(offsets, 0.1);
    println!("eps = 0.1, dphi = (0.007pi, 0.001pi): direct F = {direct:.6}, expansion F = {predicted:.6}");
    Ok(())
}
