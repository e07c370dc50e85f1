//! Recovers the refocusing-pulse error from a CP/CPMG pair that shares an
//! unknown decay envelope.
//!
//! Run with `cargo run --example estimate_error`.

use bb1spin::analysis::estimate_rotation_error;
use bb1spin::simulator::{echo_train, EchoConfig, EchoMode};

fn main() -> bb1spin::Result<()> {
    let t2 = Some(15e-6);
    for eps in [0.03, 0.0625, 0.12] {
        let cp = echo_train(&EchoConfig::new(EchoMode::Cp, 32, eps)?.with_t2(t2))?;
        let cpmg = echo_train(&EchoConfig::new(EchoMode::Cpmg, 32, eps)?.with_t2(t2))?;
        let est = estimate_rotation_error(&cp, &cpmg)?;
        println!(
            "true eps {eps:.4}  estimated {:.5}  residual rms {:.1e}",
            est.epsilon, est.residual_rms
        );
    }
    Ok(())
}
