//! Relative size of the delta and 2 delta ESEEM components after pi and
//! magic-angle refocusing pulses with small angle errors.
//!
//! Run with `cargo run --example eseem_ratios`.

use std::f64::consts::PI;

use bb1spin::analysis::{eseem_ratio, magic_refocus_angle, EseemMode, EseemRatioSpec};
use bb1spin::sequence::bb1_phases;

fn main() -> bb1spin::Result<()> {
    let magic = magic_refocus_angle();
    let (phi1, phi2) = bb1_phases(magic)?;
    println!("magic refocusing angle {:.5}pi, BB1 phases ({:.4}pi, {:.4}pi)", magic / PI, phi1 / PI, phi2 / PI);

    println!("{:>10} {:>14} {:>14}", "theta_eps", "pi refocus", "magic refocus");
    for t in [0.01, 0.02, 0.05, 0.1, 0.2] {
        let pi = eseem_ratio(&EseemRatioSpec::new(EseemMode::PiRefocus, t))?;
        let m = eseem_ratio(&EseemRatioSpec::new(EseemMode::MagicRefocus, t))?;
        println!("{t:>10.3} {pi:>14.5} {m:>14.3}");
    }
    Ok(())
}
