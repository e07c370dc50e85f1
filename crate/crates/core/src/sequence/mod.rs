//! Pulse programs, BB1 construction and the BB1-Rabi program.

pub mod dsl;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, ensure_finite, Result};
use crate::su2::normalize_phase;

pub use dsl::{format_program, parse_program, ParseError, ParseErrorKind, MAX_NESTING};

/// A hard (instantaneous) RF rotation by `theta` about the in-plane axis `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    theta: f64,
    phi: f64,
}

impl Pulse {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        ensure_finite("theta", theta)?;
        ensure_finite("phase", phi)?;
        if theta < 0.0 {
            return Err(domain("theta", format!("{theta} is negative")));
        }
        Ok(Self {
            theta,
            phi: normalize_phase(phi),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// One step of a pulse program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SequenceElement {
    Pulse(Pulse),
    /// Free evolution for `tau` seconds.
    Delay { tau: f64 },
    Repeat { count: u32, body: Vec<SequenceElement> },
    /// Sampling marker, interpreted only by the simulator.
    Acquire,
}

impl SequenceElement {
    pub fn delay(tau: f64) -> Result<Self> {
        ensure_finite("delay", tau)?;
        if tau < 0.0 {
            return Err(domain("delay", format!("{tau} is negative")));
        }
        Ok(SequenceElement::Delay { tau })
    }

    pub fn repeat(count: u32, body: Vec<SequenceElement>) -> Result<Self> {
        if count == 0 {
            return Err(domain("repeat count", "must be at least 1"));
        }
        Ok(SequenceElement::Repeat { count, body })
    }
}

impl From<Pulse> for SequenceElement {
    fn from(p: Pulse) -> Self {
        SequenceElement::Pulse(p)
    }
}

/// An ordered, named list of sequence elements.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PulseProgram {
    pub name: String,
    pub elements: Vec<SequenceElement>,
}

impl PulseProgram {
    pub fn new(name: impl Into<String>, elements: Vec<SequenceElement>) -> Self {
        Self {
            name: name.into(),
            elements,
        }
    }

    /// Sum of nominal pulse angles, with repeats unrolled.
    pub fn nominal_angle(&self) -> f64 {
        fn walk(elements: &[SequenceElement]) -> f64 {
            elements
                .iter()
                .map(|e| match e {
                    SequenceElement::Pulse(p) => p.theta,
                    SequenceElement::Repeat { count, body } => *count as f64 * walk(body),
                    _ => 0.0,
                })
                .sum()
        }
        walk(&self.elements)
    }

    /// Pulses in time order, with repeats unrolled.
    pub fn pulses(&self) -> Vec<Pulse> {
        fn walk(elements: &[SequenceElement], out: &mut Vec<Pulse>) {
            for e in elements {
                match e {
                    SequenceElement::Pulse(p) => out.push(*p),
                    SequenceElement::Repeat { count, body } => {
                        for _ in 0..*count {
                            walk(body, out);
                        }
                    }
                    _ => {}
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.elements, &mut out);
        out
    }

    /// Deepest level of `repeat` nesting (0 for a flat program).
    pub fn depth(&self) -> usize {
        fn walk(elements: &[SequenceElement]) -> usize {
            elements
                .iter()
                .map(|e| match e {
                    SequenceElement::Repeat { body, .. } => 1 + walk(body),
                    _ => 0,
                })
                .max()
                .unwrap_or(0)
        }
        walk(&self.elements)
    }
}

/// Correction phases `phi1 = arccos(-theta / 4pi)`, `phi2 = 3 phi1` for a
/// target angle `theta` in `[0, 4pi]`.
pub fn bb1_phases(theta: f64) -> Result<(f64, f64)> {
    ensure_finite("theta", theta)?;
    if !(0.0..=4.0 * PI).contains(&theta) {
        return Err(domain("theta", format!("{theta} is outside [0, 4pi]")));
    }
    let phi1 = (-theta / (4.0 * PI)).acos();
    Ok((phi1, 3.0 * phi1))
}

/// BB1 block for `theta` in time order: the target pulse followed by the
/// `pi, 2pi, pi` correction at phases `phi1, phi2, phi1`.
pub fn bb1_sequence(theta: f64) -> Result<[Pulse; 4]> {
    bb1_sequence_about(theta, 0.0)
}

/// [`bb1_sequence`] with every phase shifted by `base_phase`, i.e. BB1 about
/// the in-plane axis at `base_phase`.
pub fn bb1_sequence_about(theta: f64, base_phase: f64) -> Result<[Pulse; 4]> {
    let (phi1, phi2) = bb1_phases(theta)?;
    Ok([
        Pulse::new(theta, base_phase)?,
        Pulse::new(PI, base_phase + phi1)?,
        Pulse::new(2.0 * PI, base_phase + phi2)?,
        Pulse::new(PI, base_phase + phi1)?,
    ])
}

/// The BB1-Rabi program: a simple pulse of `remainder_theta` followed by
/// `cycles` BB1-corrected pi blocks, so that only the two pi-correction
/// phases are ever used.
pub fn bb1_rabi_program(cycles: u32, remainder_theta: f64) -> Result<PulseProgram> {
    ensure_finite("remainder theta", remainder_theta)?;
    if !(0.0..PI).contains(&remainder_theta) {
        return Err(domain(
            "remainder theta",
            format!("{remainder_theta} is outside [0, pi)"),
        ));
    }
    let mut elements = Vec::new();
    if remainder_theta > 0.0 {
        elements.push(Pulse::new(remainder_theta, 0.0)?.into());
    }
    if cycles > 0 {
        let block = bb1_sequence(PI)?.map(SequenceElement::from).to_vec();
        elements.push(SequenceElement::repeat(cycles, block)?);
    }
    Ok(PulseProgram::new(
        format!("bb1-rabi n={cycles} theta={remainder_theta}"),
        elements,
    ))
}

/// Splits a nominal rotation into whole pi blocks plus a remainder in `[0, pi)`.
pub fn split_rotation(total: f64) -> Result<(u32, f64)> {
    ensure_finite("angle", total)?;
    if total < 0.0 {
        return Err(domain("angle", format!("{total} is negative")));
    }
    // absorb rounding in k * step grids such as 4 * 0.25pi
    let blocks = (total / PI + 1e-9).floor();
    if blocks > u32::MAX as f64 {
        return Err(domain("angle", "too many pi blocks"));
    }
    let remainder = (total - blocks * PI).max(0.0);
    Ok((blocks as u32, if remainder < 1e-12 { 0.0 } else { remainder }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2::{compose_all, fidelity, rotation, RotationSpec, Unitary2};
    use proptest::prelude::*;

    fn ideal_propagator(pulses: &[Pulse]) -> Unitary2 {
        compose_all(
            pulses
                .iter()
                .map(|p| rotation(RotationSpec::ideal(p.theta(), p.phi()).unwrap())),
        )
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn reported_pi_phases() {
        let (p1, p2) = bb1_phases(PI).unwrap();
        assert!(close(p1 / PI, 0.580, 1e-3), "{}", p1 / PI);
        assert!(close(p2 / PI, 1.741, 1e-3), "{}", p2 / PI);
        assert!(close(p1.to_degrees(), 104.5, 0.05));
    }

    #[test]
    fn reported_magic_phases() {
        let (p1, p2) = bb1_phases(0.608 * PI).unwrap();
        assert!(close(p1 / PI, 0.549, 1e-3));
        assert!(close(p2 / PI, 1.646, 1e-3));
    }

    #[test]
    fn zero_angle_phases() {
        let (p1, p2) = bb1_phases(0.0).unwrap();
        assert_eq!(p1, PI / 2.0);
        assert!(close(p2, 1.5 * PI, 1e-15));
    }

    #[test]
    fn phase_domain() {
        assert!(bb1_phases(-0.1).is_err());
        assert!(bb1_phases(4.0 * PI + 1e-9).is_err());
        assert!(bb1_phases(f64::NAN).is_err());
        assert!(bb1_phases(4.0 * PI).is_ok());
    }

    #[test]
    fn pi_block_matches_rabi_notation() {
        let s = bb1_sequence(PI).unwrap();
        let phases: Vec<f64> = s.iter().map(|p| p.phi() / PI).collect();
        assert_eq!(phases[0], 0.0);
        assert!(close(phases[1], 0.58, 5e-3));
        assert!(close(phases[2], 1.74, 5e-3));
        assert_eq!(s[1], s[3]);
        assert_eq!(s.map(|p| p.theta()), [PI, PI, 2.0 * PI, PI]);
    }

    #[test]
    fn zero_angle_block_is_identity() {
        let u = ideal_propagator(&bb1_sequence(0.0).unwrap());
        assert!(fidelity(&Unitary2::identity(), &u) > 1.0 - 1e-15);
    }

    #[test]
    fn rabi_program_shapes() {
        let p = bb1_rabi_program(0, PI / 2.0).unwrap();
        assert_eq!(p.elements.len(), 1);
        assert!(matches!(p.elements[0], SequenceElement::Pulse(_)));

        let p = bb1_rabi_program(1, 0.0).unwrap();
        assert_eq!(p.pulses().len(), 4);
        assert!(close(p.nominal_angle(), 5.0 * PI, 1e-12));

        assert!(bb1_rabi_program(1, PI).is_err());
        assert!(bb1_rabi_program(1, -0.1).is_err());
    }

    #[test]
    fn rabi_program_net_rotation() {
        // four corrected pi blocks plus 0.3pi nets R_0[4.3pi] at zero error
        let p = bb1_rabi_program(4, 0.3 * PI).unwrap();
        let u = ideal_propagator(&p.pulses());
        let target = rotation(RotationSpec::ideal(4.3 * PI, 0.0).unwrap());
        assert!(u.max_abs_diff(&target) < 1e-12);
    }

    #[test]
    fn split_rotation_grid() {
        assert_eq!(split_rotation(4.0 * 0.25 * PI).unwrap(), (1, 0.0));
        let (n, r) = split_rotation(20.0 * PI + 0.5).unwrap();
        assert_eq!(n, 20);
        assert!(close(r, 0.5, 1e-12));
        assert_eq!(split_rotation(0.0).unwrap(), (0, 0.0));
    }

    proptest! {
        #[test]
        fn phi2_is_three_phi1(theta in 0.0..(4.0 * PI)) {
            let (p1, p2) = bb1_phases(theta).unwrap();
            prop_assert_eq!(p2, 3.0 * p1);
        }

        #[test]
        fn correction_block_is_exact_identity(theta in 0.0..(4.0 * PI)) {
            let u = ideal_propagator(&bb1_sequence(theta).unwrap());
            let target = rotation(RotationSpec::ideal(theta, 0.0).unwrap());
            prop_assert!(u.max_abs_diff(&target) < 1e-12);
        }

        #[test]
        fn bb1_adds_four_pi_nominal(theta in 0.0..(4.0 * PI)) {
            let total: f64 = bb1_sequence(theta).unwrap().iter().map(|p| p.theta()).sum();
            prop_assert!((total - (theta + 4.0 * PI)).abs() < 1e-12);
        }
    }
}
