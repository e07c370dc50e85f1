//! Fidelity scans, phase-error sensitivity, CP/CPMG error estimation and
//! ESEEM frequency ratios.

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, ensure_finite, Error, Result};
use crate::error_model::{Distribution, EnsembleSpec};
use crate::sequence::bb1_phases;
use crate::simulator::{echo_train, EchoConfig, EchoMode, Signal};
use crate::su2::{compose_all, fidelity, infidelity, rotation, RotationSpec, Unitary2};

/// Offsets above this size (rad) are outside the small-offset regime of
/// [`phase_sensitivity_prediction`].
pub const PHASE_OFFSET_WARNING: f64 = 0.05 * PI;

/// Infidelities below this are treated as exact zeros by [`scan_order`].
pub const INFIDELITY_FLOOR: f64 = 1e-15;

fn bb1_propagator(theta: f64, epsilon: f64, offsets: (f64, f64)) -> Result<Unitary2> {
    ensure_finite("epsilon", epsilon)?;
    ensure_finite("dphi1", offsets.0)?;
    ensure_finite("dphi2", offsets.1)?;
    let (phi1, phi2) = bb1_phases(theta)?;
    let steps = [
        (theta, 0.0),
        (PI, phi1 + offsets.0),
        (2.0 * PI, phi2 + offsets.1),
        (PI, phi1 + offsets.0),
    ];
    let us = steps
        .iter()
        .map(|&(t, p)| RotationSpec::new(t, p, epsilon).map(rotation))
        .collect::<Result<Vec<_>>>()?;
    Ok(compose_all(us))
}

fn target(theta: f64) -> Result<Unitary2> {
    Ok(rotation(RotationSpec::ideal(theta, 0.0)?))
}

/// Fidelity of an error-afflicted BB1 block (correction phases offset by
/// `offsets`) against the ideal `R_0[theta]`.
pub fn bb1_fidelity(theta: f64, epsilon: f64, offsets: (f64, f64)) -> Result<f64> {
    Ok(fidelity(&target(theta)?, &bb1_propagator(theta, epsilon, offsets)?))
}

/// `1 - bb1_fidelity`, accurate far below machine epsilon.
pub fn bb1_infidelity(theta: f64, epsilon: f64, offsets: (f64, f64)) -> Result<f64> {
    Ok(infidelity(&target(theta)?, &bb1_propagator(theta, epsilon, offsets)?))
}

/// `1 - F` of a single uncorrected pulse `R_0[theta(1 + eps)]`.
pub fn simple_infidelity(theta: f64, epsilon: f64) -> Result<f64> {
    Ok(infidelity(&target(theta)?, &rotation(RotationSpec::new(theta, 0.0, epsilon)?)))
}

/// Which rotation an order scan measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanTarget {
    Bb1,
    Simple,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub epsilon: f64,
    pub infidelity: f64,
}

/// Infidelity versus amplitude error at a fixed target angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityScan {
    pub theta: f64,
    pub target: ScanTarget,
    pub phase_offsets: (f64, f64),
    pub points: Vec<ScanPoint>,
}

/// Scans `n_points` log-spaced errors in `[lo, hi]` with exact phases and
/// fits the log-log slope of infidelity against error.
///
/// Points at or below [`INFIDELITY_FLOOR`] are left out of the fit; if fewer
/// than two remain the fit is reported as [`Error::DegenerateFit`].
pub fn scan_order(theta: f64, eps_range: (f64, f64), n_points: usize, target: ScanTarget) -> Result<(FidelityScan, f64)> {
    let (lo, hi) = eps_range;
    ensure_finite("epsilon range", lo)?;
    ensure_finite("epsilon range", hi)?;
    if !(0.0 < lo && lo < hi && hi <= 0.3) {
        return Err(domain("epsilon range", format!("need 0 < lo < hi <= 0.3, got [{lo}, {hi}]")));
    }
    if n_points < 5 {
        return Err(domain("scan points", "need at least 5"));
    }
    bb1_phases(theta)?;
    let ratio = (hi / lo).ln() / (n_points - 1) as f64;
    let eps: Vec<f64> = (0..n_points)
        .map(|k| if k == n_points - 1 { hi } else { lo * (ratio * k as f64).exp() })
        .collect();
    let points = eps
        .par_iter()
        .map(|&e| {
            let inf = match target {
                ScanTarget::Bb1 => bb1_infidelity(theta, e, (0.0, 0.0))?,
                ScanTarget::Simple => simple_infidelity(theta, e)?,
            };
            Ok(ScanPoint { epsilon: e, infidelity: inf })
        })
        .collect::<Result<Vec<_>>>()?;
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.infidelity > INFIDELITY_FLOOR)
        .map(|p| (p.epsilon.ln(), p.infidelity.ln()))
        .collect();
    if usable.len() < 2 {
        return Err(Error::DegenerateFit {
            points: points.len(),
            floor: INFIDELITY_FLOOR,
        });
    }
    let slope = least_squares_slope(&usable);
    Ok((
        FidelityScan {
            theta,
            target,
            phase_offsets: (0.0, 0.0),
            points,
        },
        slope,
    ))
}

fn least_squares_slope(xy: &[(f64, f64)]) -> f64 {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Reference coefficients of the small-offset expansion of BB1 pi fidelity:
/// `F ~ 1 - (a d1^2 + b d1 d2 + c d2^2) (eps pi)^2 - (d d1 + e d2) (eps pi)^4`.
pub const PHASE_COEFFICIENTS: [(&str, f64); 5] = [
    ("dphi1^2", 0.75),
    ("dphi1*dphi2", -1.125),
    ("dphi2^2", 0.5),
    ("dphi1 (eps^4)", 0.121),
    ("dphi2 (eps^4)", -0.091),
];

/// Predicted BB1 pi fidelity for small correction-phase offsets.
pub fn phase_sensitivity_prediction(offsets: (f64, f64), epsilon: f64) -> f64 {
    let (d1, d2) = offsets;
    let [a, b, c, d, e] = PHASE_COEFFICIENTS.map(|(_, v)| v);
    let e2 = (epsilon * PI).powi(2);
    1.0 - (a * d1 * d1 + b * d1 * d2 + c * d2 * d2) * e2 - (d * d1 + e * d2) * e2 * e2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub name: String,
    pub reference: f64,
    pub fitted: f64,
    pub relative_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientReport {
    pub rows: Vec<CoefficientRow>,
    pub max_relative_deviation: f64,
}

/// Extracts the phase-sensitivity coefficients from direct BB1 pi
/// propagation by finite differences and sets them beside the reference values.
///
/// The quadratic form comes from second differences of
/// `(1 - F) / (eps pi)^2` at `eps = 1e-3`, where the `eps^4` terms are
/// negligible. The linear `eps^4` terms come from central first differences
/// of `(1 - F) / (eps pi)^4` at `eps = 0.02`, which cancel both the
/// quadratic form and the offset-free `eps^6` residual.
pub fn verify_phase_coefficients() -> Result<CoefficientReport> {
    let quad_eps = 1e-3;
    let h = 1e-3;
    let g = |d1: f64, d2: f64| -> Result<f64> {
        Ok(bb1_infidelity(PI, quad_eps, (d1, d2))? / (quad_eps * PI).powi(2))
    };
    let g00 = g(0.0, 0.0)?;
    let a = (g(h, 0.0)? + g(-h, 0.0)? - 2.0 * g00) / (2.0 * h * h);
    let c = (g(0.0, h)? + g(0.0, -h)? - 2.0 * g00) / (2.0 * h * h);
    let b = (g(h, h)? - g(h, -h)? - g(-h, h)? + g(-h, -h)?) / (4.0 * h * h);

    let lin_eps = 0.02;
    let k = 1e-5;
    let scale = (lin_eps * PI).powi(4);
    let f = |d1: f64, d2: f64| bb1_infidelity(PI, lin_eps, (d1, d2));
    let d = (f(k, 0.0)? - f(-k, 0.0)?) / (2.0 * k) / scale;
    let e = (f(0.0, k)? - f(0.0, -k)?) / (2.0 * k) / scale;

    let rows: Vec<CoefficientRow> = PHASE_COEFFICIENTS
        .iter()
        .zip([a, b, c, d, e])
        .map(|(&(name, reference), fitted)| CoefficientRow {
            name: name.to_string(),
            reference,
            fitted,
            relative_deviation: (fitted - reference).abs() / reference.abs(),
        })
        .collect();
    let max_relative_deviation = rows.iter().map(|r| r.relative_deviation).fold(0.0, f64::max);
    Ok(CoefficientReport {
        rows,
        max_relative_deviation,
    })
}

/// Largest `|prediction - direct|` over a grid of offsets in
/// `[-max_offset, max_offset]^2` and errors in `[0, max_eps]`.
pub fn prediction_max_deviation(max_offset: f64, max_eps: f64, steps: usize) -> Result<f64> {
    let steps = steps.max(1);
    let grid = |max: f64, lo: f64| -> Vec<f64> { (0..=steps).map(|i| lo + (max - lo) * i as f64 / steps as f64).collect() };
    let offsets = grid(max_offset, -max_offset);
    let eps = grid(max_eps, 0.0);
    let mut worst: f64 = 0.0;
    for &d1 in &offsets {
        for &d2 in &offsets {
            for &e in &eps {
                let direct = bb1_fidelity(PI, e, (d1, d2))?;
                worst = worst.max((phase_sensitivity_prediction((d1, d2), e) - direct).abs());
            }
        }
    }
    Ok(worst)
}

/// Best-fit refocusing error from a CP/CPMG pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    /// Fitted `|eps|`.
    pub epsilon: f64,
    /// RMS of the even-echo ratio residuals at the fit.
    pub residual_rms: f64,
}

/// Upper end of the bracket searched by [`estimate_rotation_error`].
pub const ESTIMATE_MAX_EPSILON: f64 = 0.3;
const ESTIMATE_GRID_STEP: f64 = 0.005;

fn even_ratios(cp: &[f64], cpmg: &[f64]) -> Vec<f64> {
    cp.iter()
        .zip(cpmg)
        .skip(1)
        .step_by(2)
        .map(|(a, b)| a / b)
        .collect()
}

/// Fits the refocusing error from measured CP and CPMG echo trains.
///
/// The per-even-echo ratio CP/CPMG is compared against the same ratio from
/// [`echo_train`] run with the signals' own ensemble and timing; dividing by
/// CPMG removes any common decay envelope. The error is found by a grid over
/// `[0, 0.3]` followed by golden-section refinement around the best point.
pub fn estimate_rotation_error(cp: &Signal, cpmg: &Signal) -> Result<ErrorEstimate> {
    if cp.len() != cpmg.len() {
        return Err(Error::SignalMismatch(format!("CP has {} echoes, CPMG has {}", cp.len(), cpmg.len())));
    }
    if cp.len() < 2 {
        return Err(Error::SignalMismatch("need at least two echoes".into()));
    }
    let cpmg_values = cpmg.values();
    if cpmg_values.iter().skip(1).step_by(2).any(|&v| v.is_nan() || v <= 0.0) {
        return Err(Error::SignalMismatch("CPMG even-echo amplitudes must be positive".into()));
    }
    let data = even_ratios(&cp.values(), &cpmg_values);
    let tau = cp.samples[0].x / 2.0;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::SignalMismatch("first echo time must be positive".into()));
    }
    let n = cp.len();
    let phase_model = cp.provenance.error_model.clone();
    let ensemble = cp.provenance.ensemble.clone();
    let bb1 = cp.provenance.program.ends_with("-bb1");

    let model_ratios = |eps: f64| -> Result<Vec<f64>> {
        let run = |mode: EchoMode, use_bb1: bool| -> Result<Vec<f64>> {
            let cfg = EchoConfig::new(mode, n, 0.0)?
                .with_tau(tau)?
                .with_bb1(use_bb1)
                .with_ensemble(ensemble.clone())
                .with_error_model(phase_model.with_epsilon(eps)?);
            Ok(echo_train(&cfg)?.values())
        };
        Ok(even_ratios(&run(EchoMode::Cp, bb1)?, &run(EchoMode::Cpmg, false)?))
    };
    let cost = |eps: f64| -> Result<f64> {
        let m = model_ratios(eps)?;
        Ok(data.iter().zip(&m).map(|(d, m)| (d - m).powi(2)).sum())
    };

    let steps = (ESTIMATE_MAX_EPSILON / ESTIMATE_GRID_STEP).round() as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| i as f64 * ESTIMATE_GRID_STEP).collect();
    let costs = grid.iter().map(|&e| cost(e)).collect::<Result<Vec<_>>>()?;
    let best = costs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty grid");

    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(steps)];
    let (mut eps_hat, mut c_hat) = golden_section(lo, hi, 60, &cost)?;
    if costs[best] <= c_hat {
        eps_hat = grid[best];
        c_hat = costs[best];
    }
    Ok(ErrorEstimate {
        epsilon: eps_hat,
        residual_rms: (c_hat / data.len() as f64).sqrt(),
    })
}

/// Golden-section minimization on `[lo, hi]`, returning `(x, f(x))`.
fn golden_section<F>(mut lo: f64, mut hi: f64, iterations: usize, f: &F) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..iterations {
        if hi - lo < 1e-10 {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

/// Mean pi-pulse fidelity `<|cos(theta_eps / 2)|>` for a Gaussian spread of
/// absolute angle errors `theta_eps ~ N(0, sigma^2)`.
pub fn ensemble_mean_fidelity(sigma_theta: f64) -> Result<f64> {
    ensure_finite("sigma", sigma_theta)?;
    if sigma_theta < 0.0 {
        return Err(domain("sigma", "is negative"));
    }
    let spec = EnsembleSpec::amplitude(Distribution::Gaussian { mean: 0.0, sigma: sigma_theta }, 64)?;
    Ok(spec
        .epsilon()
        .nodes(spec.epsilon_nodes())
        .into_iter()
        .map(|(x, w)| w * (x / 2.0).cos().abs())
        .sum())
}

/// Fidelity of a pi pulse that over-rotates by the absolute angle `theta_eps`.
pub fn pi_pulse_fidelity(theta_eps: f64) -> Result<f64> {
    ensure_finite("theta_eps", theta_eps)?;
    let ideal = target(PI)?;
    let actual = rotation(RotationSpec::new(PI, 0.0, theta_eps / PI)?);
    Ok(fidelity(&ideal, &actual))
}

/// Refocusing pulse used in the ESEEM ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EseemMode {
    /// `pi + theta_eps`.
    PiRefocus,
    /// Twice the magic angle plus `theta_eps`.
    MagicRefocus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EseemRatioSpec {
    pub mode: EseemMode,
    /// Absolute error of the refocusing pulse (rad).
    pub theta_eps: f64,
    /// Base modulation frequency in Hz; annotation only.
    pub delta_hz: f64,
}

impl EseemRatioSpec {
    pub fn new(mode: EseemMode, theta_eps: f64) -> Self {
        Self {
            mode,
            theta_eps,
            delta_hz: 26e3,
        }
    }

    /// `(delta, 2 delta)` component frequencies in Hz.
    pub fn components(&self) -> (f64, f64) {
        (self.delta_hz, 2.0 * self.delta_hz)
    }
}

/// Ratio `F(delta) / F(2 delta)` of the two ESEEM components.
///
/// `2 theta_eps^2` after a `pi + theta_eps` refocusing pulse and
/// `sqrt(2) / theta_eps` after a magic-angle one; the second keeps the sign
/// of `theta_eps`.
pub fn eseem_ratio(spec: &EseemRatioSpec) -> Result<f64> {
    let t = ensure_finite("theta_eps", spec.theta_eps)?;
    match spec.mode {
        EseemMode::PiRefocus => Ok(2.0 * t * t),
        EseemMode::MagicRefocus if t == 0.0 => Err(Error::Divergent),
        EseemMode::MagicRefocus => Ok(SQRT_2 / t),
    }
}

/// `2 arccos(sqrt(1/3))`, the refocusing angle at which a perfect pulse
/// leaves no `2 delta` component.
pub fn magic_refocus_angle() -> f64 {
    2.0 * (1.0f64 / 3.0).sqrt().acos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_bb1_is_perfect_without_error() {
        for theta in [0.0, 0.3, PI / 2.0, PI, 2.5, 4.0 * PI] {
            assert!((bb1_fidelity(theta, 0.0, (0.0, 0.0)).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bb1_pi_at_ten_percent() {
        // direct propagation: 1 - F = 4.622e-6, i.e. 0.00488 (eps pi)^6
        let inf = bb1_infidelity(PI, 0.1, (0.0, 0.0)).unwrap();
        assert!((inf - 4.622_436_55e-6).abs() < 1e-13, "{inf}");
        assert!(inf < 1e-5);
    }

    #[test]
    fn bb1_residual_rotation_angle() {
        let u = bb1_propagator(PI, 0.1, (0.0, 0.0)).unwrap();
        let residual = target(PI).unwrap().dagger() * u;
        let (_, angle) = crate::su2::axis_angle(&residual);
        // 2 arccos(1 - 4.622e-6)
        assert!((angle - 6.081_078_9e-3).abs() < 1e-9, "{angle}");
    }

    #[test]
    fn measured_phases_scenario() {
        let f = bb1_fidelity(PI, 0.1, (0.007 * PI, 0.001 * PI)).unwrap();
        assert!((f - 0.9999).abs() <= 1e-4, "{f}");
        assert!((f - 0.999_946_001_151).abs() < 1e-11);
    }

    #[test]
    fn prediction_examples() {
        assert_eq!(phase_sensitivity_prediction((0.0, 0.0), 0.3), 1.0);
        let p = phase_sensitivity_prediction((0.007 * PI, 0.001 * PI), 0.1);
        assert!((p - 0.9999).abs() <= 1e-4);
        assert!((p - 0.999_948_250_991).abs() < 1e-11);
    }

    #[test]
    fn order_scans() {
        let (scan, slope) = scan_order(PI, (1e-2, 1e-1), 11, ScanTarget::Bb1).unwrap();
        assert_eq!(scan.points.len(), 11);
        assert!(scan.points.windows(2).all(|w| w[0].epsilon < w[1].epsilon));
        assert!((5.7..=6.3).contains(&slope), "{slope}");
        let (_, slope) = scan_order(PI, (1e-2, 1e-1), 11, ScanTarget::Simple).unwrap();
        assert!((1.9..=2.1).contains(&slope), "{slope}");
    }

    #[test]
    fn zero_angle_scan_is_degenerate() {
        assert!(matches!(
            scan_order(0.0, (1e-2, 1e-1), 8, ScanTarget::Bb1),
            Err(Error::DegenerateFit { .. })
        ));
    }

    #[test]
    fn scan_domain() {
        assert!(scan_order(PI, (0.0, 0.1), 8, ScanTarget::Bb1).is_err());
        assert!(scan_order(PI, (0.1, 0.05), 8, ScanTarget::Bb1).is_err());
        assert!(scan_order(PI, (0.1, 0.4), 8, ScanTarget::Bb1).is_err());
        assert!(scan_order(PI, (0.01, 0.1), 4, ScanTarget::Bb1).is_err());
        assert!(scan_order(5.0 * PI, (0.01, 0.1), 8, ScanTarget::Bb1).is_err());
    }

    #[test]
    fn coefficient_extraction() {
        let report = verify_phase_coefficients().unwrap();
        assert_eq!(report.rows.len(), 5);
        for row in &report.rows[..3] {
            assert!(row.relative_deviation < 0.02, "{row:?}");
        }
        assert!(report.max_relative_deviation < 0.02);
        assert!(report.rows[1].fitted < 0.0);
    }

    #[test]
    fn ensemble_fidelity_values() {
        assert_eq!(ensemble_mean_fidelity(0.0).unwrap(), 1.0);
        let f = ensemble_mean_fidelity(0.1 * PI).unwrap();
        assert!((f - 0.988).abs() <= 1e-3, "{f}");
        // small-sigma form 1 - sigma^2 / 8
        assert!((f - (1.0 - (0.1 * PI).powi(2) / 8.0)).abs() < 1e-4);
        assert!(ensemble_mean_fidelity(-1.0).is_err());
        let det = pi_pulse_fidelity(0.01 * PI).unwrap();
        assert!((det - (0.005 * PI).cos()).abs() < 1e-14);
        assert!(det > 0.9993);
    }

    #[test]
    fn eseem_values() {
        let pi0 = eseem_ratio(&EseemRatioSpec::new(EseemMode::PiRefocus, 0.0)).unwrap();
        assert_eq!(pi0, 0.0);
        let pi1 = eseem_ratio(&EseemRatioSpec::new(EseemMode::PiRefocus, 0.1)).unwrap();
        assert!((pi1 - 0.02).abs() <= 4.0 * f64::EPSILON * 0.02);
        let m = eseem_ratio(&EseemRatioSpec::new(EseemMode::MagicRefocus, 0.1)).unwrap();
        assert!((m - 14.142).abs() <= 1e-3);
        assert!(matches!(
            eseem_ratio(&EseemRatioSpec::new(EseemMode::MagicRefocus, 0.0)),
            Err(Error::Divergent)
        ));
        assert_eq!(EseemRatioSpec::new(EseemMode::PiRefocus, 0.1).components(), (26e3, 52e3));
    }

    #[test]
    fn magic_angle() {
        let a = magic_refocus_angle();
        assert!((0.607..=0.609).contains(&(a / PI)));
        assert!(((a / 2.0).cos() - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
        let (p1, p2) = bb1_phases(a).unwrap();
        assert!((p1 / PI - 0.549).abs() < 1e-3);
        assert!((p2 / PI - 1.646).abs() < 1e-3);
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_section(0.0, 1.0, 100, &|x: f64| Ok((x - 0.3).powi(2))).unwrap();
        assert!((x - 0.3).abs() < 1e-8);
        assert!(fx < 1e-15);
    }

    fn pair(eps: f64, n: usize) -> (Signal, Signal) {
        let cp = echo_train(&EchoConfig::new(EchoMode::Cp, n, eps).unwrap()).unwrap();
        let cpmg = echo_train(&EchoConfig::new(EchoMode::Cpmg, n, eps).unwrap()).unwrap();
        (cp, cpmg)
    }

    #[test]
    fn estimator_recovers_simulated_error() {
        let (cp, cpmg) = pair(0.1, 16);
        let est = estimate_rotation_error(&cp, &cpmg).unwrap();
        assert!((est.epsilon - 0.1).abs() < 1e-3, "{est:?}");
        assert!(est.residual_rms < 1e-6);
    }

    #[test]
    fn estimator_refines_between_grid_points() {
        let (cp, cpmg) = pair(0.0737, 16);
        let est = estimate_rotation_error(&cp, &cpmg).unwrap();
        assert!((est.epsilon - 0.0737).abs() < 1e-5, "{est:?}");
    }

    #[test]
    fn estimator_identical_signals() {
        let (_, cpmg) = pair(0.05, 8);
        let est = estimate_rotation_error(&cpmg, &cpmg).unwrap();
        assert_eq!(est.epsilon, 0.0);
    }

    #[test]
    fn estimator_rejects_bad_input() {
        let (cp, cpmg) = pair(0.05, 8);
        let (short, _) = pair(0.05, 6);
        assert!(matches!(estimate_rotation_error(&short, &cpmg), Err(Error::SignalMismatch(_))));
        let mut dead = cpmg.clone();
        dead.samples[1].value = 0.0;
        assert!(matches!(estimate_rotation_error(&cp, &dead), Err(Error::SignalMismatch(_))));
    }

    proptest! {
        #[test]
        fn bb1_never_worse_than_simple(theta in 1e-3..PI, eps in 0.01..0.2f64) {
            let corrected = bb1_fidelity(theta, eps, (0.0, 0.0)).unwrap();
            let simple = fidelity(&target(theta).unwrap(), &rotation(RotationSpec::new(theta, 0.0, eps).unwrap()));
            prop_assert!(corrected >= simple);
        }

        #[test]
        fn pi_ratio_is_even(t in -1.0..1.0f64) {
            let a = eseem_ratio(&EseemRatioSpec::new(EseemMode::PiRefocus, t)).unwrap();
            let b = eseem_ratio(&EseemRatioSpec::new(EseemMode::PiRefocus, -t)).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn magic_ratio_is_odd(t in 1e-6..1.0f64) {
            let a = eseem_ratio(&EseemRatioSpec::new(EseemMode::MagicRefocus, t)).unwrap();
            let b = eseem_ratio(&EseemRatioSpec::new(EseemMode::MagicRefocus, -t)).unwrap();
            prop_assert_eq!(a, -b);
            prop_assert!(a > 0.0);
        }
    }
}
