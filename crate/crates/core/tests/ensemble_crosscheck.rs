use std::f64::consts::PI;

use bb1spin::error_model::{ensemble_nodes, monte_carlo_nodes, Distribution, EnsembleSpec, ErrorModel};
use bb1spin::sequence::{Pulse, PulseProgram};
use bb1spin::simulator::{bloch, ensemble_average, propagate, SpinState};

fn nutation(nodes: &[bb1spin::error_model::EnsembleNode], angles: &[f64]) -> Vec<f64> {
    let programs: Vec<PulseProgram> = angles
        .iter()
        .map(|&t| PulseProgram::new("", vec![Pulse::new(t, 0.0).unwrap().into()]))
        .collect();
    ensemble_average(nodes, |n| {
        let model = ErrorModel::amplitude(n.epsilon).unwrap();
        programs
            .iter()
            .map(|p| -bloch(&propagate(p, &model, n.detuning, SpinState::up()))[2])
            .collect()
    })
}

#[test]
fn monte_carlo_agrees_with_quadrature() {
    let spec = EnsembleSpec::amplitude(Distribution::Gaussian { mean: 0.0, sigma: 0.05 }, 41).unwrap();
    let angles: Vec<f64> = (0..=20).map(|k| k as f64 * PI).collect();
    let quad = nutation(&ensemble_nodes(&spec), &angles);
    let samples = 40_000;
    let mc = nutation(&monte_carlo_nodes(&spec, samples, 7), &angles);
    // each sample is bounded by 1, so 5 standard errors is at most 5 / sqrt(N)
    let tol = 5.0 / (samples as f64).sqrt();
    for (q, m) in quad.iter().zip(&mc) {
        assert!((q - m).abs() < tol, "{q} vs {m}");
    }
}

#[test]
fn monte_carlo_is_seeded() {
    let spec = EnsembleSpec::amplitude(Distribution::Uniform { lo: -0.1, hi: 0.1 }, 16).unwrap();
    let a = nutation(&monte_carlo_nodes(&spec, 500, 42), &[3.0 * PI]);
    let b = nutation(&monte_carlo_nodes(&spec, 500, 42), &[3.0 * PI]);
    let c = nutation(&monte_carlo_nodes(&spec, 500, 43), &[3.0 * PI]);
    assert_eq!(a, b);
    assert_ne!(a, c);
}
