//! Exact 2x2 unitary algebra for single-spin rotations.
//!
//! Rotations are built in closed form as
//! `R_phi[theta(1+eps)] = cos(a) I + i sin(a) (sigma_x cos(phi) + sigma_y sin(phi))`
//! with `a = theta (1 + eps) / 2`. The `+i` sign of the exponent is kept as
//! written; every comparison in the crate goes through [`fidelity`], which is
//! insensitive to the global phase.

use std::f64::consts::{PI, TAU};
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, ensure_finite, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Tolerance used by [`Unitary2::is_unitary`] callers in tests and checks.
pub const UNITARY_TOL: f64 = 1e-12;

/// A complex 2x2 unitary operator stored row-major `[u00, u01, u10, u11]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Unitary2 {
    m: [Complex64; 4],
}

impl Unitary2 {
    /// Builds an operator from raw entries. Unitarity is not checked here;
    /// use [`Unitary2::is_unitary`] when the entries come from outside.
    pub const fn from_entries(m: [Complex64; 4]) -> Self {
        Self { m }
    }

    pub const fn identity() -> Self {
        Self::from_entries([ONE, ZERO, ZERO, ONE])
    }

    pub fn entries(&self) -> [Complex64; 4] {
        self.m
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_entries(self.m.map(|z| z * c))
    }

    /// Conjugate transpose, which is also the inverse of a unitary.
    pub fn dagger(&self) -> Self {
        let [a, b, c, d] = self.m;
        Self::from_entries([a.conj(), c.conj(), b.conj(), d.conj()])
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0] + self.m[3]
    }

    pub fn det(&self) -> Complex64 {
        self.m[0] * self.m[3] - self.m[1] * self.m[2]
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `U^dagger U = I` entrywise and `|det U| = 1`, both within `tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        let gram = self.dagger() * *self;
        gram.max_abs_diff(&Self::identity()) <= tol && (self.det().norm() - 1.0).abs() <= tol
    }

    /// Applies the operator to a two-component spinor.
    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let [a, b, c, d] = self.m;
        [a * v[0] + b * v[1], c * v[0] + d * v[1]]
    }
}

impl Default for Unitary2 {
    fn default() -> Self {
        Self::identity()
    }
}

/// Ordinary matrix product `self · rhs` (so `rhs` acts first).
impl Mul for Unitary2 {
    type Output = Unitary2;

    fn mul(self, rhs: Unitary2) -> Unitary2 {
        let [a, b, c, d] = self.m;
        let [e, f, g, h] = rhs.m;
        Unitary2::from_entries([
            a * e + b * g,
            a * f + b * h,
            c * e + d * g,
            c * f + d * h,
        ])
    }
}

/// Nominal angle, in-plane phase and fractional amplitude error of one rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationSpec {
    theta: f64,
    phi: f64,
    epsilon: f64,
}

impl RotationSpec {
    /// Validates the inputs and normalizes `phi` into `[0, 2pi)`.
    pub fn new(theta: f64, phi: f64, epsilon: f64) -> Result<Self> {
        ensure_finite("theta", theta)?;
        ensure_finite("phi", phi)?;
        ensure_finite("epsilon", epsilon)?;
        if theta < 0.0 {
            return Err(domain("theta", format!("{theta} is negative")));
        }
        Ok(Self {
            theta,
            phi: normalize_phase(phi),
            epsilon,
        })
    }

    /// Error-free rotation about the axis at `phi`.
    pub fn ideal(theta: f64, phi: f64) -> Result<Self> {
        Self::new(theta, phi, 0.0)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Rotation angle actually applied, `theta (1 + eps)`.
    pub fn effective_angle(&self) -> f64 {
        self.theta * (1.0 + self.epsilon)
    }
}

/// Maps any finite phase into `[0, 2pi)`.
pub fn normalize_phase(phi: f64) -> f64 {
    let p = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if p >= TAU {
        0.0
    } else {
        p
    }
}

/// Closed-form propagator of an in-plane rotation with amplitude error.
pub fn rotation(spec: RotationSpec) -> Unitary2 {
    let half = spec.effective_angle() / 2.0;
    let (s, c) = half.sin_cos();
    let c = Complex64::new(c, 0.0);
    let off = I * s;
    Unitary2::from_entries([
        c,
        off * Complex64::from_polar(1.0, -spec.phi),
        off * Complex64::from_polar(1.0, spec.phi),
        c,
    ])
}

/// Free precession about z by `angle`, i.e. `exp(i sigma_z angle / 2)`.
pub fn z_rotation(angle: f64) -> Unitary2 {
    let h = angle / 2.0;
    Unitary2::from_entries([
        Complex64::from_polar(1.0, h),
        ZERO,
        ZERO,
        Complex64::from_polar(1.0, -h),
    ])
}

/// Propagator of `first` followed in time by `second`.
pub fn compose(first: Unitary2, second: Unitary2) -> Unitary2 {
    second * first
}

/// Composes a time-ordered list of propagators.
pub fn compose_all<I: IntoIterator<Item = Unitary2>>(steps: I) -> Unitary2 {
    steps
        .into_iter()
        .fold(Unitary2::identity(), compose)
}

/// `|Tr(ideal · actual^-1)| / 2`, a global-phase-insensitive value in `[0, 1]`.
pub fn fidelity(ideal: &Unitary2, actual: &Unitary2) -> f64 {
    ((*ideal * actual.dagger()).trace().norm() / 2.0).min(1.0)
}

/// `1 - fidelity`, computed without cancellation so that values down to
/// ~1e-30 stay accurate.
///
/// With `W = ideal · actual^-1 = e^{ig}(c I + i s n.sigma)` the squared sine of
/// the residual half-angle is read off the traceless part of `W`, and
/// `1 - c = s^2 / (1 + c)`.
pub fn infidelity(ideal: &Unitary2, actual: &Unitary2) -> f64 {
    let [w00, w01, w10, w11] = (*ideal * actual.dagger()).entries();
    let s2 = (w01.norm_sqr() + w10.norm_sqr()) / 2.0 + (w00 - w11).norm_sqr() / 4.0;
    let c = ((w00 + w11).norm() / 2.0).min(1.0);
    (s2 / (1.0 + c)).max(0.0)
}

/// Rotation axis and angle in `[0, pi]` of `u`, up to global phase.
///
/// The decomposition follows the same `+i` convention as [`rotation`], so
/// `axis_angle(rotation(theta, phi, 0))` returns the in-plane axis at `phi`
/// for `theta <= pi`. A zero angle reports the conventional axis `(0, 0, 1)`.
pub fn axis_angle(u: &Unitary2) -> ([f64; 3], f64) {
    let root = u.det().sqrt();
    let v = u.scale(root.inv());
    let [v00, v01, v10, v11] = v.entries();
    let mut c = (v00 + v11).re / 2.0;
    let mut n = [
        (v01 + v10).im / 2.0,
        (v01 - v10).re / 2.0,
        (v00 - v11).im / 2.0,
    ];
    if c < 0.0 {
        c = -c;
        n = n.map(|x| -x);
    }
    let s = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if s < 1e-300 {
        return ([0.0, 0.0, 1.0], 0.0);
    }
    let angle = 2.0 * s.atan2(c);
    (n.map(|x| x / s), angle.min(PI))
}
