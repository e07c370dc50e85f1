//! Parses a pulse program, prints its canonical form and propagates it.
//!
//! Run with `cargo run --example pulse_programs`.

use bb1spin::error_model::ErrorModel;
use bb1spin::sequence::{format_program, parse_program};
use bb1spin::simulator::{bloch, propagate_sampled, SpinState};

const SOURCE: &str = "\
# corrected 90 then a short echo train
BB1 theta=90deg
repeat 3 {
  delay 1e-6
  pulse theta=1pi phase=0.5pi
  delay 1e-6
  acquire
}
";

fn main() -> bb1spin::Result<()> {
    let program = parse_program(SOURCE)?;
    print!("{}", format_program(&program));

    let model = ErrorModel::amplitude(0.05)?;
    let (last, samples) = propagate_sampled(&program, &model, 2.0e5, SpinState::up());
    for (k, s) in samples.iter().enumerate() {
        let [x, y, z] = bloch(s);
        println!("acquire {k}: bloch = ({x:+.5}, {y:+.5}, {z:+.5})");
    }
    println!("final norm {:.15}", last.norm());

    if let Err(e) = parse_program("pulse theta=1 phase=0") {
        println!("diagnostic: {e}");
    }
    Ok(())
}
