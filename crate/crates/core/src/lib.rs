//! Two-level spin dynamics under hard pulses, with BB1 composite-pulse
//! correction of pulse-amplitude errors.
//!
//! The crate is organised bottom up:
//!
//! * [`su2`]: rotations, composition, fidelity and axis-angle extraction.
//! * [`sequence`]: pulse programs, BB1 blocks and the pulse-program text
//!   format.
//! * [`error_model`]: amplitude and phase errors and the quadrature ensembles
//!   that average over them.
//! * [`simulator`]: propagation, Rabi traces and CP/CPMG echo trains.
//! * [`analysis`]: fidelity scans, phase-error sensitivity, error estimation
//!   from CP/CPMG pairs and ESEEM ratios.
//! * [`cli`]: the `bb1spin` command line.
//!
//! Each capability has a runnable example under `examples/`:
//! `fidelity_scan`, `phase_errors`, `bb1_rabi`, `echo_trains`,
//! `estimate_error`, `eseem_ratios` and `pulse_programs`.
//!
//! ```
//! use bb1spin::analysis::bb1_infidelity;
//! use std::f64::consts::PI;
//!
//! let corrected = bb1_infidelity(PI, 0.1, (0.0, 0.0)).unwrap();
//! assert!(corrected < 1e-5);
//! ```

pub mod analysis;
pub mod angle;
pub mod cli;
pub mod error;
pub mod error_model;
pub mod sequence;
pub mod simulator;
pub mod su2;

pub use error::{Error, Result};
