//! Time-domain propagation of pulse programs over spin ensembles.
//!
//! Ensemble members are propagated independently (in parallel) and reduced
//! in node order, so every signal is bit-identical regardless of the number
//! of worker threads.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, ensure_finite, Result};
use crate::error_model::{apply_error, ensemble_nodes, EnsembleNode, EnsembleSpec, ErrorModel};
use crate::sequence::{bb1_rabi_program, bb1_sequence_about, split_rotation, Pulse, PulseProgram, SequenceElement};
use crate::su2::{compose, rotation, z_rotation, RotationSpec, Unitary2};

/// A normalized spin-1/2 state `(up, down)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinState {
    amp: [Complex64; 2],
}

impl SpinState {
    /// Normalizes `(up, down)`; fails on the zero vector.
    pub fn new(up: Complex64, down: Complex64) -> Result<Self> {
        let norm = (up.norm_sqr() + down.norm_sqr()).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(domain("spin state", "amplitudes must be finite and not both zero"));
        }
        Ok(Self {
            amp: [up / norm, down / norm],
        })
    }

    /// Spin up, `(1, 0)`.
    pub fn up() -> Self {
        Self {
            amp: [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        }
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        self.amp
    }

    pub fn norm(&self) -> f64 {
        (self.amp[0].norm_sqr() + self.amp[1].norm_sqr()).sqrt()
    }

    pub fn evolve(&self, u: &Unitary2) -> Self {
        Self { amp: u.apply(self.amp) }
    }
}

/// Bloch vector `(<sigma_x>, <sigma_y>, <sigma_z>)`.
pub fn bloch(state: &SpinState) -> [f64; 3] {
    let [a, b] = state.amp;
    let coh = a.conj() * b;
    [2.0 * coh.re, 2.0 * coh.im, a.norm_sqr() - b.norm_sqr()]
}

fn pulse_propagator(p: &Pulse, model: &ErrorModel) -> Unitary2 {
    rotation(apply_error(p, model))
}

/// Propagator of a whole program for one spin (acquire markers ignored).
pub fn program_propagator(program: &PulseProgram, model: &ErrorModel, detuning: f64) -> Unitary2 {
    fn walk(elements: &[SequenceElement], model: &ErrorModel, detuning: f64) -> Unitary2 {
        elements.iter().fold(Unitary2::identity(), |acc, e| match e {
            SequenceElement::Pulse(p) => compose(acc, pulse_propagator(p, model)),
            SequenceElement::Delay { tau } => compose(acc, z_rotation(detuning * tau)),
            SequenceElement::Repeat { count, body } => {
                let u = walk(body, model, detuning);
                (0..*count).fold(acc, |a, _| compose(a, u))
            }
            SequenceElement::Acquire => acc,
        })
    }
    walk(&program.elements, model, detuning)
}

/// Evolves `initial` through `program`: pulses rotate per `model`, delays
/// precess about z by `detuning * tau`, repeats unroll.
pub fn propagate(program: &PulseProgram, model: &ErrorModel, detuning: f64, initial: SpinState) -> SpinState {
    propagate_sampled(program, model, detuning, initial).0
}

/// Like [`propagate`], also returning the state at every `acquire` marker.
pub fn propagate_sampled(
    program: &PulseProgram,
    model: &ErrorModel,
    detuning: f64,
    initial: SpinState,
) -> (SpinState, Vec<SpinState>) {
    fn walk(elements: &[SequenceElement], model: &ErrorModel, detuning: f64, state: &mut SpinState, out: &mut Vec<SpinState>) {
        for e in elements {
            match e {
                SequenceElement::Pulse(p) => *state = state.evolve(&pulse_propagator(p, model)),
                SequenceElement::Delay { tau } => *state = state.evolve(&z_rotation(detuning * tau)),
                SequenceElement::Repeat { count, body } => {
                    for _ in 0..*count {
                        walk(body, model, detuning, state, out);
                    }
                }
                SequenceElement::Acquire => out.push(*state),
            }
        }
    }
    let mut state = initial;
    let mut samples = Vec::new();
    walk(&program.elements, model, detuning, &mut state, &mut samples);
    (state, samples)
}

/// Weighted average of a per-node vector, reduced in node order.
pub fn ensemble_average<F>(nodes: &[EnsembleNode], per_node: F) -> Vec<f64>
where
    F: Fn(&EnsembleNode) -> Vec<f64> + Sync,
{
    let values: Vec<Vec<f64>> = nodes.par_iter().map(&per_node).collect();
    let mut acc = vec![0.0; values.first().map_or(0, Vec::len)];
    for (node, v) in nodes.iter().zip(&values) {
        for (a, x) in acc.iter_mut().zip(v) {
            *a += node.weight * x;
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: f64,
    pub value: f64,
}

/// What produced a signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub program: String,
    pub ensemble: EnsembleSpec,
    pub error_model: ErrorModel,
}

/// A sampled experiment output with axis metadata; `x` is strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub x_label: String,
    pub x_unit: String,
    pub value_label: String,
    pub value_unit: String,
    pub samples: Vec<Sample>,
    pub provenance: Provenance,
}

impl Signal {
    pub fn xs(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.x).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.value).collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Checks the strictly increasing `x` invariant.
    pub fn is_well_formed(&self) -> bool {
        self.samples.windows(2).all(|w| w[0].x < w[1].x)
    }
}

fn excitation_program(theta: f64, use_bb1: bool) -> Result<PulseProgram> {
    if !use_bb1 {
        return Ok(PulseProgram::new("rabi", vec![Pulse::new(theta, 0.0)?.into()]));
    }
    let (blocks, remainder) = split_rotation(theta)?;
    bb1_rabi_program(blocks, remainder)
}

/// Rabi or BB1-Rabi nutation trace.
///
/// For each nominal angle `k * step <= max_angle` a spin starting up is
/// driven by either a single pulse or the BB1-Rabi decomposition (whole BB1
/// pi blocks after a simple remainder pulse). The recorded value is the
/// ensemble average of `-<sigma_z>`, which is `-1` at zero angle and `+1`
/// after an ideal pi pulse.
pub fn rabi_trace(max_angle: f64, step: f64, ensemble: &EnsembleSpec, use_bb1: bool) -> Result<Signal> {
    ensure_finite("max angle", max_angle)?;
    ensure_finite("step", step)?;
    if step <= 0.0 {
        return Err(domain("step", "must be positive"));
    }
    if max_angle < 0.0 {
        return Err(domain("max angle", "is negative"));
    }
    let count = (max_angle / step + 1e-9).floor() as usize + 1;
    let angles: Vec<f64> = (0..count).map(|k| k as f64 * step).collect();
    let programs = angles
        .iter()
        .map(|&t| excitation_program(t, use_bb1))
        .collect::<Result<Vec<_>>>()?;
    let nodes = ensemble_nodes(ensemble);
    let values = ensemble_average(&nodes, |node| {
        let model = ErrorModel::default().at_node(node.epsilon);
        programs
            .iter()
            .map(|p| -bloch(&propagate(p, &model, node.detuning, SpinState::up()))[2])
            .collect()
    });
    Ok(Signal {
        x_label: "angle".into(),
        x_unit: "rad".into(),
        value_label: "signal (-<sz>)".into(),
        value_unit: "1".into(),
        samples: angles
            .into_iter()
            .zip(values)
            .map(|(x, value)| Sample { x, value })
            .collect(),
        provenance: Provenance {
            program: if use_bb1 { "bb1-rabi" } else { "rabi" }.into(),
            ensemble: ensemble.clone(),
            error_model: ErrorModel::default(),
        },
    })
}

/// Multi-echo sequence flavour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EchoMode {
    /// Carr-Purcell: refocusing about x, in phase with the excitation.
    Cp,
    /// Carr-Purcell-Meiboom-Gill: refocusing about y, in quadrature.
    Cpmg,
}

impl EchoMode {
    pub fn refocus_phase(self) -> f64 {
        match self {
            EchoMode::Cp => 0.0,
            EchoMode::Cpmg => FRAC_PI_2,
        }
    }
}

impl fmt::Display for EchoMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EchoMode::Cp => "cp",
            EchoMode::Cpmg => "cpmg",
        })
    }
}

impl FromStr for EchoMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cp" => Ok(EchoMode::Cp),
            "cpmg" => Ok(EchoMode::Cpmg),
            other => Err(domain("echo mode", format!("`{other}` (expected cp or cpmg)"))),
        }
    }
}

/// Parameters of a CP/CPMG echo-train experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EchoConfig {
    pub mode: EchoMode,
    pub n_refocus: usize,
    /// Half the echo spacing, in seconds.
    pub tau: f64,
    pub use_bb1: bool,
    /// Optional `exp(-t / T2)` envelope time constant, in seconds.
    pub t2: Option<f64>,
    /// Error seen by the refocusing pulses. Ensemble amplitude errors add to
    /// its `epsilon`.
    pub error_model: ErrorModel,
    pub ensemble: EnsembleSpec,
}

impl EchoConfig {
    /// Defaults: `tau` = 1 us, simple pulses, no envelope, and the detuning
    /// spread of [`EnsembleSpec::echo_detuning`].
    pub fn new(mode: EchoMode, n_refocus: usize, epsilon: f64) -> Result<Self> {
        let tau = 1e-6;
        Ok(Self {
            mode,
            n_refocus,
            tau,
            use_bb1: false,
            t2: None,
            error_model: ErrorModel::amplitude(epsilon)?,
            ensemble: EnsembleSpec::echo_detuning(tau, n_refocus)?,
        })
    }

    pub fn with_bb1(mut self, use_bb1: bool) -> Self {
        self.use_bb1 = use_bb1;
        self
    }

    pub fn with_t2(mut self, t2: Option<f64>) -> Self {
        self.t2 = t2;
        self
    }

    /// Changes `tau` and rescales the default detuning spread with it.
    pub fn with_tau(mut self, tau: f64) -> Result<Self> {
        self.ensemble = EnsembleSpec::echo_detuning(tau, self.n_refocus)?;
        self.tau = tau;
        Ok(self)
    }

    pub fn with_ensemble(mut self, ensemble: EnsembleSpec) -> Self {
        self.ensemble = ensemble;
        self
    }

    pub fn with_error_model(mut self, model: ErrorModel) -> Self {
        self.error_model = model;
        self
    }

    pub fn program_name(&self) -> String {
        format!("{}{}", self.mode, if self.use_bb1 { "-bb1" } else { "" })
    }

    /// The refocusing cycles: `n x (tau, refocus, tau, acquire)`.
    pub fn program(&self) -> Result<PulseProgram> {
        let phase = self.mode.refocus_phase();
        let mut body = vec![SequenceElement::delay(self.tau)?];
        if self.use_bb1 {
            body.extend(bb1_sequence_about(PI, phase)?.map(SequenceElement::from));
        } else {
            body.push(Pulse::new(PI, phase)?.into());
        }
        body.push(SequenceElement::delay(self.tau)?);
        body.push(SequenceElement::Acquire);
        Ok(PulseProgram::new(self.program_name(), vec![SequenceElement::repeat(self.n_refocus as u32, body)?]))
    }

    fn validate(&self) -> Result<()> {
        if self.n_refocus == 0 || self.n_refocus > u32::MAX as usize {
            return Err(domain("refocusing count", "must be at least 1"));
        }
        ensure_finite("tau", self.tau)?;
        if self.tau <= 0.0 {
            return Err(domain("tau", "must be positive"));
        }
        if let Some(t2) = self.t2 {
            ensure_finite("T2", t2)?;
            if t2 <= 0.0 {
                return Err(domain("T2", "must be positive"));
            }
        }
        Ok(())
    }
}

/// Echo amplitudes of a CP or CPMG train.
///
/// An ideal 90-degree x pulse tips the spins into the transverse plane, then
/// each cycle waits `tau`, refocuses (simple pi pulse or BB1 pi block at the
/// mode's phase, both subject to the configured error) and waits `tau` again.
/// At each echo the transverse magnetization of every member is projected on
/// the echo axis an error-free, on-resonance spin would have, the projection
/// is ensemble-averaged and its magnitude recorded, optionally times
/// `exp(-t / T2)`.
pub fn echo_train(config: &EchoConfig) -> Result<Signal> {
    config.validate()?;
    let program = config.program()?;
    let excite = rotation(RotationSpec::ideal(FRAC_PI_2, 0.0)?);
    let start = SpinState::up().evolve(&excite);

    let (_, ideal) = propagate_sampled(&program, &ErrorModel::default(), 0.0, start);
    let axes: Vec<[f64; 2]> = ideal
        .iter()
        .map(|s| {
            let [x, y, _] = bloch(s);
            let r = x.hypot(y);
            if r > 0.0 {
                [x / r, y / r]
            } else {
                [FRAC_1_SQRT_2, FRAC_1_SQRT_2]
            }
        })
        .collect();

    let nodes = ensemble_nodes(&config.ensemble);
    let models = nodes
        .iter()
        .map(|n| config.error_model.at_node(config.error_model.epsilon() + n.epsilon))
        .collect::<Vec<_>>();
    let indexed: Vec<(EnsembleNode, &ErrorModel)> = nodes.iter().copied().zip(models.iter()).collect();
    let projections: Vec<Vec<f64>> = indexed
        .par_iter()
        .map(|(node, model)| {
            let (_, states) = propagate_sampled(&program, model, node.detuning, start);
            states
                .iter()
                .zip(&axes)
                .map(|(s, a)| {
                    let [x, y, _] = bloch(s);
                    x * a[0] + y * a[1]
                })
                .collect()
        })
        .collect();
    let mut acc = vec![0.0; axes.len()];
    for (node, p) in nodes.iter().zip(&projections) {
        for (a, v) in acc.iter_mut().zip(p) {
            *a += node.weight * v;
        }
    }

    let samples = acc
        .into_iter()
        .enumerate()
        .map(|(k, v)| {
            let t = 2.0 * config.tau * (k + 1) as f64;
            let envelope = config.t2.map_or(1.0, |t2| (-t / t2).exp());
            Sample { x: t, value: v.abs() * envelope }
        })
        .collect();
    Ok(Signal {
        x_label: "time".into(),
        x_unit: "s".into(),
        value_label: "echo amplitude".into(),
        value_unit: "1".into(),
        samples,
        provenance: Provenance {
            program: config.program_name(),
            ensemble: config.ensemble.clone(),
            error_model: config.error_model.clone(),
        },
    })
}
