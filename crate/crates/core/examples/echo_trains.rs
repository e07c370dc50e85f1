//! CP and CPMG echo trains with a 10% refocusing error, and CP rescued by
//! BB1-corrected refocusing pulses.
//!
//! Run with `cargo run --example echo_trains`.

use bb1spin::simulator::{echo_train, EchoConfig, EchoMode};

fn main() -> bb1spin::Result<()> {
    let n = 32;
    let eps = 0.1;
    let cp = echo_train(&EchoConfig::new(EchoMode::Cp, n, eps)?)?;
    let cpmg = echo_train(&EchoConfig::new(EchoMode::Cpmg, n, eps)?)?;
    let cp_bb1 = echo_train(&EchoConfig::new(EchoMode::Cp, n, eps)?.with_bb1(true))?;

    println!("{:>5} {:>10} {:>10} {:>10}", "echo", "CP", "CPMG", "CP+BB1");
    for k in (1..n).step_by(2) {
        println!(
            "{:>5} {:>10.5} {:>10.5} {:>10.5}",
            k + 1,
            cp.samples[k].value,
            cpmg.samples[k].value,
            cp_bb1.samples[k].value
        );
    }
    Ok(())
}
