//! The vertical (momentum) subsystem and its pendulum reduction.
//!
//! With `h_i = <λ, f_i>` the geodesic flow projects to the closed system
//!
//! ```text
//! h0' = 2 chi h1 h2,   h1' = h2 h0,   h2' = -h1 h0
//! ```
//!
//! which in the chart `h1 = r cos(γ/2)`, `h2 = r sin(γ/2)`, `c = -2 h0`
//! becomes the pendulum `r' = 0`, `γ' = c`, `c' = -2 chi r² sin γ`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::UnimodularParams;
use crate::error::{Error, Result};
use crate::Vec3;

/// Momenta `(h0, h1, h2)` of a covector in the left-invariant frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VerticalState {
    pub h0: f64,
    pub h1: f64,
    pub h2: f64,
}

impl VerticalState {
    pub const fn new(h0: f64, h1: f64, h2: f64) -> Self {
        Self { h0, h1, h2 }
    }

    pub fn to_vec(&self) -> Vec3 {
        Vec3::new(self.h0, self.h1, self.h2)
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.h0, self.h1, self.h2]
    }

    pub fn is_finite(&self) -> bool {
        self.h0.is_finite() && self.h1.is_finite() && self.h2.is_finite()
    }
}

impl From<Vec3> for VerticalState {
    fn from(v: Vec3) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<[f64; 3]> for VerticalState {
    fn from(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

/// `H = (h1² + h2²) / 2`.
pub fn hamiltonian_h(h: &VerticalState) -> f64 {
    0.5 * (h.h1 * h.h1 + h.h2 * h.h2)
}

/// Pendulum energy `E = 2 h0² - 2 chi (h1² - h2²)`.
pub fn energy_e(h: &VerticalState, params: UnimodularParams) -> f64 {
    2.0 * h.h0 * h.h0 - 2.0 * params.chi() * (h.h1 * h.h1 - h.h2 * h.h2)
}

/// `C_l = 4 kappa H + E = 2 (h0² + (kappa - chi) h1² + (kappa + chi) h2²)`.
pub fn casimir_left(h: &VerticalState, params: UnimodularParams) -> f64 {
    casimir_form(&h.to_vec(), params)
}

/// The quadratic form shared by the left and right Casimirs.
pub(crate) fn casimir_form(v: &Vec3, params: UnimodularParams) -> f64 {
    let (chi, kappa) = (params.chi(), params.kappa());
    2.0 * (v[0] * v[0] + (kappa - chi) * v[1] * v[1] + (kappa + chi) * v[2] * v[2])
}

pub fn grad_hamiltonian(h: &VerticalState) -> Vec3 {
    Vec3::new(0.0, h.h1, h.h2)
}

pub fn grad_energy(h: &VerticalState, params: UnimodularParams) -> Vec3 {
    let chi = params.chi();
    Vec3::new(4.0 * h.h0, -4.0 * chi * h.h1, 4.0 * chi * h.h2)
}

pub fn grad_casimir_left(h: &VerticalState, params: UnimodularParams) -> Vec3 {
    let (chi, kappa) = (params.chi(), params.kappa());
    Vec3::new(
        4.0 * h.h0,
        4.0 * (kappa - chi) * h.h1,
        4.0 * (kappa + chi) * h.h2,
    )
}

/// Right-hand side of the vertical system, ordered `(h0', h1', h2')`.
pub fn vertical_field(h: &VerticalState, params: UnimodularParams) -> Vec3 {
    Vec3::new(
        2.0 * params.chi() * h.h1 * h.h2,
        h.h2 * h.h0,
        -h.h1 * h.h0,
    )
}

/// Pendulum chart `(r, γ, c)`; `γ` is kept unwrapped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumState {
    r: f64,
    pub gamma: f64,
    pub c: f64,
}

impl PendulumState {
    pub fn new(r: f64, gamma: f64, c: f64) -> Result<Self> {
        if !(r >= 0.0) {
            return Err(Error::NegativeRadius(r));
        }
        Ok(Self { r, gamma, c })
    }

    #[inline]
    pub fn r(&self) -> f64 {
        self.r
    }

    /// True at zero radius, where `γ` carries no information.
    pub fn is_degenerate(&self) -> bool {
        self.r == 0.0
    }

    /// `γ` reduced to `(-π, π]`.
    pub fn gamma_wrapped(&self) -> f64 {
        wrap_angle(self.gamma)
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.r, self.gamma, self.c]
    }
}

/// Reduces an angle to `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Polar chart of the momenta. At `h1 = h2 = 0` the angle is set to 0 and
/// the result reports [`PendulumState::is_degenerate`].
pub fn to_pendulum(h: &VerticalState) -> PendulumState {
    let r = h.h1.hypot(h.h2);
    let gamma = if r == 0.0 { 0.0 } else { 2.0 * h.h2.atan2(h.h1) };
    PendulumState { r, gamma, c: -2.0 * h.h0 }
}

pub fn from_pendulum(p: &PendulumState) -> VerticalState {
    let theta = 0.5 * p.gamma;
    VerticalState::new(-0.5 * p.c, p.r * theta.cos(), p.r * theta.sin())
}

/// Right-hand side of the pendulum, ordered `(r', γ', c')`.
pub fn pendulum_field(p: &PendulumState, params: UnimodularParams) -> Vec3 {
    Vec3::new(0.0, p.c, -2.0 * params.chi() * p.r * p.r * p.gamma.sin())
}

/// `E = c²/2 - 2 chi r² cos γ`.
pub fn pendulum_energy(p: &PendulumState, params: UnimodularParams) -> f64 {
    0.5 * p.c * p.c - 2.0 * params.chi() * p.r * p.r * p.gamma.cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PendulumRegime {
    Oscillation,
    Rotation,
    Separatrix,
    Degenerate,
}

impl PendulumRegime {
    pub fn name(self) -> &'static str {
        match self {
            PendulumRegime::Oscillation => "oscillation",
            PendulumRegime::Rotation => "rotation",
            PendulumRegime::Separatrix => "separatrix",
            PendulumRegime::Degenerate => "degenerate",
        }
    }
}

impl fmt::Display for PendulumRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub const DEFAULT_REGIME_TOL: f64 = 1e-9;

/// Phase-portrait region of a pendulum state, comparing `E` with the
/// separatrix level `2 chi r²`.
pub fn pendulum_regime(p: &PendulumState, params: UnimodularParams, tol: f64) -> PendulumRegime {
    let barrier = 2.0 * params.chi() * p.r * p.r;
    if 0.5 * barrier <= tol {
        return PendulumRegime::Degenerate;
    }
    let e = pendulum_energy(p, params);
    if (e - barrier).abs() <= tol * (1.0 + e.abs()) {
        PendulumRegime::Separatrix
    } else if e > barrier {
        PendulumRegime::Rotation
    } else {
        PendulumRegime::Oscillation
    }
}
