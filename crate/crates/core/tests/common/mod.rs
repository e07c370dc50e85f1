//! Generators shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use bb1spin::sequence::{Pulse, PulseProgram, SequenceElement};
use proptest::prelude::*;

/// Angles that are either exact multiples of pi/4 or arbitrary floats.
pub fn angle(max: f64) -> impl Strategy<Value = f64> {
    prop_oneof![
        (0u32..=(4.0 * max / PI) as u32).prop_map(|k| k as f64 * PI / 4.0),
        0.0..max,
    ]
}

pub fn pulse() -> impl Strategy<Value = SequenceElement> {
    (angle(4.0 * PI), angle(TAU)).prop_map(|(t, p)| Pulse::new(t, p).unwrap().into())
}

pub fn leaf() -> impl Strategy<Value = SequenceElement> {
    prop_oneof![
        4 => pulse(),
        2 => (0.0..1e-3f64).prop_map(|t| SequenceElement::delay(t).unwrap()),
        1 => Just(SequenceElement::Acquire),
    ]
}

pub fn element() -> impl Strategy<Value = SequenceElement> {
    leaf().prop_recursive(3, 48, 6, |inner| {
        (1u32..=9, prop::collection::vec(inner, 0..6))
            .prop_map(|(n, body)| SequenceElement::repeat(n, body).unwrap())
    })
}

/// Programs as the parser returns them: unnamed.
pub fn program() -> impl Strategy<Value = PulseProgram> {
    prop::collection::vec(element(), 0..12).prop_map(|e| PulseProgram::new("", e))
}
