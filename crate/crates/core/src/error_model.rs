//! Systematic pulse errors and the ensembles they are averaged over.
//!
//! An [`ErrorModel`] is what one spin sees: a fractional amplitude error
//! shared by every pulse, plus a fixed offset per programmed phase channel.
//! An [`EnsembleSpec`] describes how the amplitude error and the detuning vary
//! across the sample; [`ensemble_nodes`] turns it into deterministic
//! quadrature nodes.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use gauss_quad::{GaussHermite, GaussLegendre};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{domain, ensure_finite, Result};
use crate::sequence::{bb1_phases, Pulse};
use crate::su2::{normalize_phase, RotationSpec};

/// Phase channels match when their nominal phases agree to this many radians.
pub const PHASE_MATCH_TOL: f64 = 1e-9;

/// Offset applied to every pulse programmed at `phase`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseOffset {
    pub phase: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorModel {
    epsilon: f64,
    phase_offsets: Vec<PhaseOffset>,
}

impl ErrorModel {
    pub fn new(epsilon: f64, phase_offsets: Vec<PhaseOffset>) -> Result<Self> {
        check_epsilon(epsilon)?;
        let mut normalized = Vec::with_capacity(phase_offsets.len());
        for po in phase_offsets {
            ensure_finite("phase", po.phase)?;
            ensure_finite("phase offset", po.offset)?;
            if po.offset.abs() >= FRAC_PI_2 {
                return Err(domain("phase offset", format!("|{}| must be below pi/2", po.offset)));
            }
            normalized.push(PhaseOffset {
                phase: normalize_phase(po.phase),
                offset: po.offset,
            });
        }
        Ok(Self {
            epsilon,
            phase_offsets: normalized,
        })
    }

    /// Amplitude error only.
    pub fn amplitude(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, Vec::new())
    }

    /// Amplitude error plus offsets on the two correction channels of a BB1
    /// block about the x axis for target angle `theta`.
    pub fn with_bb1_offsets(epsilon: f64, theta: f64, dphi1: f64, dphi2: f64) -> Result<Self> {
        let (phi1, phi2) = bb1_phases(theta)?;
        Self::new(
            epsilon,
            vec![
                PhaseOffset { phase: phi1, offset: dphi1 },
                PhaseOffset { phase: phi2, offset: dphi2 },
            ],
        )
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn phase_offsets(&self) -> &[PhaseOffset] {
        &self.phase_offsets
    }

    /// Same phase channels with a different amplitude error.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self {
            epsilon,
            phase_offsets: self.phase_offsets.clone(),
        })
    }

    /// Copy at a quadrature node's amplitude error. Tail nodes of unbounded
    /// distributions may sit outside `|eps| < 1`; only finiteness is required.
    pub(crate) fn at_node(&self, epsilon: f64) -> Self {
        debug_assert!(epsilon.is_finite());
        Self {
            epsilon,
            phase_offsets: self.phase_offsets.clone(),
        }
    }

    /// Offset for the channel whose nominal phase matches `phi`, else 0.
    pub fn offset_for(&self, phi: f64) -> f64 {
        let phi = normalize_phase(phi);
        self.phase_offsets
            .iter()
            .find(|po| {
                let d = (po.phase - phi).abs();
                d.min(TAU - d) <= PHASE_MATCH_TOL
            })
            .map_or(0.0, |po| po.offset)
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    ensure_finite("epsilon", epsilon)?;
    if epsilon.abs() >= 1.0 {
        return Err(domain("epsilon", format!("|{epsilon}| must be below 1")));
    }
    Ok(())
}

/// The rotation a pulse actually performs under `model`.
pub fn apply_error(pulse: &Pulse, model: &ErrorModel) -> RotationSpec {
    let phi = pulse.phi() + model.offset_for(pulse.phi());
    RotationSpec::new(pulse.theta(), phi, model.epsilon())
        .expect("validated pulse and error model give a valid rotation")
}

/// A one-dimensional distribution over the amplitude error or the detuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Distribution {
    Gaussian { mean: f64, sigma: f64 },
    Uniform { lo: f64, hi: f64 },
    /// Atoms `(value, weight)`; weights are normalized on validation.
    Discrete { atoms: Vec<(f64, f64)> },
}

impl Distribution {
    /// A single atom at `value`.
    pub fn point(value: f64) -> Self {
        Distribution::Discrete {
            atoms: vec![(value, 1.0)],
        }
    }

    fn validated(self, name: &'static str) -> Result<Self> {
        match self {
            Distribution::Gaussian { mean, sigma } => {
                ensure_finite(name, mean)?;
                ensure_finite(name, sigma)?;
                if sigma < 0.0 {
                    return Err(domain(name, "gaussian sigma is negative"));
                }
                Ok(self)
            }
            Distribution::Uniform { lo, hi } => {
                ensure_finite(name, lo)?;
                ensure_finite(name, hi)?;
                if lo > hi {
                    return Err(domain(name, format!("uniform bounds {lo} > {hi}")));
                }
                Ok(self)
            }
            Distribution::Discrete { atoms } => {
                if atoms.is_empty() {
                    return Err(domain(name, "discrete distribution has no atoms"));
                }
                for &(v, w) in &atoms {
                    ensure_finite(name, v)?;
                    ensure_finite(name, w)?;
                    if w <= 0.0 {
                        return Err(domain(name, format!("weight {w} is not positive")));
                    }
                }
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                Ok(Distribution::Discrete {
                    atoms: atoms.into_iter().map(|(v, w)| (v, w / total)).collect(),
                })
            }
        }
    }

    /// Quadrature nodes `(value, weight)` with weights summing to 1.
    pub fn nodes(&self, count: usize) -> Vec<(f64, f64)> {
        let mut raw: Vec<(f64, f64)> = match *self {
            Distribution::Gaussian { mean, sigma } if sigma == 0.0 || count == 1 => vec![(mean, 1.0)],
            Distribution::Gaussian { mean, sigma } => GaussHermite::new(count)
                .expect("at least two nodes")
                .into_node_weight_pairs()
                .into_iter()
                .map(|(x, w)| (mean + std::f64::consts::SQRT_2 * sigma * x, w))
                .collect(),
            Distribution::Uniform { lo, hi } if lo == hi || count == 1 => vec![((lo + hi) / 2.0, 1.0)],
            Distribution::Uniform { lo, hi } => {
                let (mid, half) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
                GaussLegendre::new(count)
                    .expect("at least two nodes")
                    .into_node_weight_pairs()
                    .into_iter()
                    .map(|(x, w)| (mid + half * x, w))
                    .collect()
            }
            Distribution::Discrete { ref atoms } => atoms.clone(),
        };
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = raw.iter().map(|n| n.1).sum();
        raw.into_iter().map(|(v, w)| (v, w / total)).collect()
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Distribution::Gaussian { mean, sigma } => Normal::new(mean, sigma)
                .expect("validated sigma")
                .sample(rng),
            Distribution::Uniform { lo, hi } if lo == hi => lo,
            Distribution::Uniform { lo, hi } => Uniform::new(lo, hi).expect("validated bounds").sample(rng),
            Distribution::Discrete { ref atoms } => {
                let u: f64 = Uniform::new(0.0, 1.0).expect("unit interval").sample(rng);
                let mut acc = 0.0;
                for &(v, w) in atoms {
                    acc += w;
                    if u < acc {
                        return v;
                    }
                }
                atoms.last().expect("non-empty").0
            }
        }
    }
}

/// Distribution of amplitude error and detuning (rad/s) across the sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    epsilon: Distribution,
    detuning: Distribution,
    epsilon_nodes: usize,
    detuning_nodes: usize,
}

impl EnsembleSpec {
    pub fn new(
        epsilon: Distribution,
        epsilon_nodes: usize,
        detuning: Distribution,
        detuning_nodes: usize,
    ) -> Result<Self> {
        if epsilon_nodes == 0 || detuning_nodes == 0 {
            return Err(domain("quadrature nodes", "need at least one node"));
        }
        Ok(Self {
            epsilon: epsilon.validated("epsilon distribution")?,
            detuning: detuning.validated("detuning distribution")?,
            epsilon_nodes,
            detuning_nodes,
        })
    }

    /// Amplitude-error distribution only, on resonance.
    pub fn amplitude(epsilon: Distribution, nodes: usize) -> Result<Self> {
        Self::new(epsilon, nodes, Distribution::point(0.0), 1)
    }

    /// A single spin: no amplitude error, on resonance.
    pub fn single() -> Self {
        Self::amplitude(Distribution::point(0.0), 1).expect("valid")
    }

    /// Detuning spread for echo experiments: uniform over `|delta| tau <= 4pi`.
    ///
    /// Spins are dispersed over four full precession turns between pulses.
    /// The node count grows with the echo count so that the average stays
    /// converged; the signal after `n` echoes is a trigonometric polynomial
    /// in `delta tau` whose degree grows linearly in `n`.
    pub fn echo_detuning(tau: f64, n_echoes: usize) -> Result<Self> {
        ensure_finite("tau", tau)?;
        if tau <= 0.0 {
            return Err(domain("tau", "must be positive"));
        }
        let max = 4.0 * PI / tau;
        Self::new(
            Distribution::point(0.0),
            1,
            Distribution::Uniform { lo: -max, hi: max },
            (16 * n_echoes).max(512),
        )
    }

    pub fn epsilon(&self) -> &Distribution {
        &self.epsilon
    }

    pub fn detuning(&self) -> &Distribution {
        &self.detuning
    }

    pub fn epsilon_nodes(&self) -> usize {
        self.epsilon_nodes
    }

    pub fn detuning_nodes(&self) -> usize {
        self.detuning_nodes
    }

    /// Copy with a different amplitude-error distribution.
    pub fn with_epsilon(&self, epsilon: Distribution, nodes: usize) -> Result<Self> {
        Self::new(epsilon, nodes, self.detuning.clone(), self.detuning_nodes)
    }

    /// Copy with different node counts.
    pub fn with_nodes(&self, epsilon_nodes: usize, detuning_nodes: usize) -> Result<Self> {
        Self::new(self.epsilon.clone(), epsilon_nodes, self.detuning.clone(), detuning_nodes)
    }
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self::single()
    }
}

/// One ensemble member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleNode {
    pub epsilon: f64,
    pub detuning: f64,
    pub weight: f64,
}

/// Tensor-product quadrature over amplitude error (outer) and detuning (inner).
pub fn ensemble_nodes(spec: &EnsembleSpec) -> Vec<EnsembleNode> {
    let eps = spec.epsilon.nodes(spec.epsilon_nodes);
    let det = spec.detuning.nodes(spec.detuning_nodes);
    let mut out = Vec::with_capacity(eps.len() * det.len());
    for &(e, we) in &eps {
        for &(d, wd) in &det {
            out.push(EnsembleNode {
                epsilon: e,
                detuning: d,
                weight: we * wd,
            });
        }
    }
    let total: f64 = out.iter().map(|n| n.weight).sum();
    for n in &mut out {
        n.weight /= total;
    }
    out
}

/// Seeded Monte Carlo sample of the ensemble with equal weights, for
/// cross-checking the quadrature.
pub fn monte_carlo_nodes(spec: &EnsembleSpec, samples: usize, seed: u64) -> Vec<EnsembleNode> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = 1.0 / samples.max(1) as f64;
    (0..samples)
        .map(|_| EnsembleNode {
            epsilon: spec.epsilon.sample(&mut rng),
            detuning: spec.detuning.sample(&mut rng),
            weight: w,
        })
        .collect()
}
