//! Right-invariant Hamiltonians evaluated by adjoint transport.
//!
//! Let `q(t)` be the base curve of a Hamiltonian flow of some left-invariant
//! `F(h)`, with left-trivialised velocity `u = ∇F(h)`. The right-invariant
//! frame is `e_i(q) = -(L_q)_* Ad_{q⁻¹} f_i`, so
//!
//! ```text
//! g_i = <λ, e_i> = -Σ_k h_k (Ad_{q⁻¹} f_i)^k,    a_i^k(q) = -(Ad_{q⁻¹} f_i)^k.
//! ```
//!
//! `M = Ad_{q⁻¹}` obeys the linear equation `M' = -ad_u M` with `M(0) = I`,
//! so the group element itself is never needed. The 12-dimensional state
//! `(h, M)` is integrated jointly, `M` flattened row-major.

use serde::{Deserialize, Serialize};

use crate::algebra::{structure_constants, UnimodularParams};
use crate::odeflow::{integrate, IntegrateError, IntegratorConfig, Stats};
use crate::vertical::{
    casimir_form, casimir_left, energy_e, grad_casimir_left, grad_energy, grad_hamiltonian,
    hamiltonian_h, VerticalState,
};
use crate::{Mat3, Vec3};

/// Momenta together with `M ≈ Ad_{q(t)⁻¹}` (column `j` is the image of `f_j`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportState {
    pub h: VerticalState,
    pub m: Mat3,
}

impl TransportState {
    /// State over the identity: `M = I`.
    pub fn at_identity(h: VerticalState) -> Self {
        Self { h, m: Mat3::identity() }
    }

    pub fn to_flat(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        out[..3].copy_from_slice(&self.h.to_array());
        for r in 0..3 {
            for c in 0..3 {
                out[3 + 3 * r + c] = self.m[(r, c)];
            }
        }
        out
    }

    pub fn from_flat(y: &[f64]) -> Self {
        assert_eq!(y.len(), 12, "transport state has 12 components");
        Self {
            h: VerticalState::new(y[0], y[1], y[2]),
            m: Mat3::from_row_slice(&y[3..12]),
        }
    }
}

/// Time derivative of a [`TransportState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportDerivative {
    pub h_dot: Vec3,
    pub m_dot: Mat3,
}

/// Flow of the left-invariant Hamiltonian with gradient `grad_f` at `s.h`:
/// `h_j' = {F, h_j}` and `M' = -ad_u M` with `u = grad_f`.
pub fn transport_field(s: &TransportState, params: UnimodularParams, grad_f: &Vec3) -> TransportDerivative {
    let ad_u = structure_constants(params).ad(grad_f);
    TransportDerivative {
        h_dot: ad_u.transpose() * s.h.to_vec(),
        m_dot: -(ad_u * s.m),
    }
}

/// The left-invariant Hamiltonians whose flows are transported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// The sub-Riemannian Hamiltonian `H`; its flow is the geodesic flow.
    Hamiltonian,
    /// The pendulum energy `E`.
    Energy,
    /// The left Casimir `C_l`.
    CasimirLeft,
}

impl Generator {
    pub fn gradient(self, h: &VerticalState, params: UnimodularParams) -> Vec3 {
        match self {
            Generator::Hamiltonian => grad_hamiltonian(h),
            Generator::Energy => grad_energy(h, params),
            Generator::CasimirLeft => grad_casimir_left(h, params),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TransportTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<TransportState>,
    pub stats: Stats,
}

impl TransportTrajectory {
    pub fn records(&self, params: UnimodularParams) -> Vec<IntegralRecord> {
        self.times
            .iter()
            .zip(&self.states)
            .map(|(&t, s)| integral_record(t, s, params))
            .collect()
    }
}

/// Integrates the augmented `(h, M)` system from `M = I`.
pub fn integrate_transport(
    params: UnimodularParams,
    h0: VerticalState,
    generator: Generator,
    t_final: f64,
    config: &IntegratorConfig,
) -> Result<TransportTrajectory, IntegrateError> {
    let field = |y: &[f64], dy: &mut [f64]| {
        let s = TransportState::from_flat(y);
        let d = transport_field(&s, params, &generator.gradient(&s.h, params));
        dy[..3].copy_from_slice(d.h_dot.as_slice());
        for r in 0..3 {
            for c in 0..3 {
                dy[3 + 3 * r + c] = d.m_dot[(r, c)];
            }
        }
    };
    let y0 = TransportState::at_identity(h0).to_flat();
    let traj = integrate(field, &y0, t_final, config)?;
    Ok(TransportTrajectory {
        states: traj.states.iter().map(|y| TransportState::from_flat(y)).collect(),
        times: traj.times,
        stats: traj.stats,
    })
}

/// `g_i = -Σ_k h_k M[k][i]`.
pub fn right_invariant_g(s: &TransportState) -> Vec3 {
    -(s.m.transpose() * s.h.to_vec())
}

/// `C_r = 2 (g0² + (kappa - chi) g1² + (kappa + chi) g2²)`.
pub fn casimir_right(g: &Vec3, params: UnimodularParams) -> f64 {
    casimir_form(g, params)
}

/// `|C_l(h) - C_r(g)|`; zero along exact flows started at the identity.
pub fn casimir_identity_residual(s: &TransportState, params: UnimodularParams) -> f64 {
    (casimir_left(&s.h, params) - casimir_right(&right_invariant_g(s), params)).abs()
}

/// `det m` rounded once from the exact expansion.
///
/// Every triple product is split into four exact terms with fused
/// multiply-adds and the 24 terms are summed with compensation, so the
/// result stays accurate when `m` has large entries and `det m ≈ 1`.
pub fn det_accurate(m: &Mat3) -> f64 {
    const PERMS: [([usize; 3], f64); 6] = [
        ([0, 1, 2], 1.0),
        ([1, 2, 0], 1.0),
        ([2, 0, 1], 1.0),
        ([0, 2, 1], -1.0),
        ([1, 0, 2], -1.0),
        ([2, 1, 0], -1.0),
    ];
    let two_prod = |a: f64, b: f64| {
        let p = a * b;
        (p, a.mul_add(b, -p))
    };
    let mut terms = [0.0f64; 24];
    for (n, (perm, sign)) in PERMS.iter().enumerate() {
        let (p, e) = two_prod(m[(0, perm[0])], m[(1, perm[1])]);
        let c = sign * m[(2, perm[2])];
        let (q0, q1) = two_prod(p, c);
        let (r0, r1) = two_prod(e, c);
        terms[4 * n..4 * n + 4].copy_from_slice(&[q0, q1, r0, r1]);
    }
    // summing by decreasing magnitude keeps the compensation effective
    terms.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for t in terms {
        let s = sum + t;
        comp += if sum.abs() >= t.abs() { (sum - s) + t } else { (t - s) + sum };
        sum = s;
    }
    sum + comp
}

/// Integral values sampled at one instant of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralRecord {
    pub t: f64,
    #[serde(rename = "H")]
    pub hamiltonian: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "Cl")]
    pub casimir_left: f64,
    pub g0: f64,
    pub g1: f64,
    pub g2: f64,
    #[serde(rename = "Cr")]
    pub casimir_right: f64,
    pub casimir_residual: f64,
}

impl IntegralRecord {
    pub fn g(&self) -> Vec3 {
        Vec3::new(self.g0, self.g1, self.g2)
    }
}

pub fn integral_record(t: f64, s: &TransportState, params: UnimodularParams) -> IntegralRecord {
    let g = right_invariant_g(s);
    let cl = casimir_left(&s.h, params);
    let cr = casimir_right(&g, params);
    IntegralRecord {
        t,
        hamiltonian: hamiltonian_h(&s.h),
        energy: energy_e(&s.h, params),
        casimir_left: cl,
        g0: g[0],
        g1: g[1],
        g2: g[2],
        casimir_right: cr,
        casimir_residual: (cl - cr).abs(),
    }
}

/// `|x - x0| / (1 + |x0|)`.
#[inline]
pub fn relative_drift(x: f64, x0: f64) -> f64 {
    (x - x0).abs() / (1.0 + x0.abs())
}

/// Worst relative drifts of each integral over a record sequence.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Drifts {
    #[serde(rename = "H")]
    pub hamiltonian: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "Cl")]
    pub casimir_left: f64,
    pub g0: f64,
    pub g1: f64,
    pub g2: f64,
    /// Largest `|C_l - C_r| / (1 + |C_l(0)|)`.
    pub casimir_identity: f64,
}

impl Drifts {
    pub fn max_g(&self) -> f64 {
        self.g0.max(self.g1).max(self.g2)
    }

    pub fn max_all(&self) -> f64 {
        self.hamiltonian.max(self.energy).max(self.casimir_left).max(self.max_g())
    }

    pub fn merge(&self, other: &Drifts) -> Drifts {
        Drifts {
            hamiltonian: self.hamiltonian.max(other.hamiltonian),
            energy: self.energy.max(other.energy),
            casimir_left: self.casimir_left.max(other.casimir_left),
            g0: self.g0.max(other.g0),
            g1: self.g1.max(other.g1),
            g2: self.g2.max(other.g2),
            casimir_identity: self.casimir_identity.max(other.casimir_identity),
        }
    }
}

pub fn drifts(records: &[IntegralRecord]) -> Drifts {
    let Some(first) = records.first() else {
        return Drifts::default();
    };
    let scale = 1.0 + first.casimir_left.abs();
    records.iter().fold(Drifts::default(), |d, r| Drifts {
        hamiltonian: d.hamiltonian.max(relative_drift(r.hamiltonian, first.hamiltonian)),
        energy: d.energy.max(relative_drift(r.energy, first.energy)),
        casimir_left: d.casimir_left.max(relative_drift(r.casimir_left, first.casimir_left)),
        g0: d.g0.max(relative_drift(r.g0, first.g0)),
        g1: d.g1.max(relative_drift(r.g1, first.g1)),
        g2: d.g2.max(relative_drift(r.g2, first.g2)),
        casimir_identity: d.casimir_identity.max(r.casimir_residual / scale),
    })
}

/// `g_ij = ∂g_i/∂x_j(Id) = Σ_k c[j][i][k] h_k` in linearly adapted coordinates.
pub fn frame_coefficient_derivatives(params: UnimodularParams, h: &VerticalState) -> Mat3 {
    let sc = structure_constants(params);
    let hv = h.to_vec();
    Mat3::from_fn(|i, j| (0..3).map(|k| sc.get(j, i, k) * hv[k]).sum())
}

/// `Σ_k a_i^k(exp(t f_j)) h_k = -(exp(-t ad_{f_j})ᵀ h)_i`, as a matrix over `(i, j)`.
fn coefficients_along_rays(params: UnimodularParams, h: &VerticalState, t: f64) -> Mat3 {
    let sc = structure_constants(params);
    let hv = h.to_vec();
    let mut out = Mat3::zeros();
    for j in 0..3 {
        let ad = sc.ad(&Vec3::ith(j, 1.0));
        let col = -(matrix_exp_3x3(&(-t * ad)).transpose() * hv);
        out.set_column(j, &col);
    }
    out
}

/// Central-difference estimate of `g_ij` along the one-parameter subgroups
/// `exp(t f_j)`.
pub fn lemma_fd_estimate(params: UnimodularParams, h: &VerticalState, t_step: f64) -> Mat3 {
    let plus = coefficients_along_rays(params, h, t_step);
    let minus = coefficients_along_rays(params, h, -t_step);
    (plus - minus) / (2.0 * t_step)
}

/// Elementwise `|FD estimate - g_ij|`.
pub fn verify_lemma_fd(params: UnimodularParams, h: &VerticalState, t_step: f64) -> Mat3 {
    (lemma_fd_estimate(params, h, t_step) - frame_coefficient_derivatives(params, h)).abs()
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
pub fn matrix_exp_3x3(a: &Mat3) -> Mat3 {
    if !a.iter().all(|x| x.is_finite()) {
        return Mat3::from_element(f64::NAN);
    }
    let norm = a.column_iter().map(|c| c.abs().sum()).fold(0.0f64, f64::max);
    // scale so that ‖A / 2^s‖₁ ≤ 1/2
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a / 2f64.powi(squarings);

    let mut sum = Mat3::identity();
    let mut term = Mat3::identity();
    for k in 1..=30 {
        term = term * scaled / k as f64;
        sum += term;
        if term.amax() <= f64::EPSILON * 1e-3 * sum.amax() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p(chi: f64, kappa: f64) -> UnimodularParams {
        UnimodularParams::new(chi, kappa).unwrap()
    }

    fn tight() -> IntegratorConfig {
        IntegratorConfig::adaptive(1e-12, 1e-14)
    }

    #[test]
    fn field_at_identity() {
        let pr = p(2.0, 0.0);
        let s = TransportState::at_identity(VerticalState::new(3.0, 1.0, 2.0));
        let d = transport_field(&s, pr, &grad_hamiltonian(&s.h));
        assert_eq!(d.h_dot, Vec3::new(8.0, 6.0, -3.0));
        assert_eq!(d.m_dot, -structure_constants(pr).ad(&Vec3::new(0.0, 1.0, 2.0)));
        let zero = transport_field(&s, pr, &Vec3::zeros());
        assert_eq!(zero.h_dot, Vec3::zeros());
        assert_eq!(zero.m_dot, Mat3::zeros());
    }

    #[test]
    fn casimir_generates_no_vertical_motion() {
        let pr = p(0.7, -1.9);
        let s = TransportState::at_identity(VerticalState::new(0.4, -1.2, 0.9));
        let d = transport_field(&s, pr, &grad_casimir_left(&s.h, pr));
        assert!(d.h_dot.amax() < 1e-14, "{}", d.h_dot);
    }

    #[test]
    fn g_at_identity() {
        let s = TransportState::at_identity(VerticalState::new(1.0, 2.0, 3.0));
        assert_eq!(right_invariant_g(&s), Vec3::new(-1.0, -2.0, -3.0));
        let s = TransportState::at_identity(VerticalState::default());
        assert_eq!(right_invariant_g(&s), Vec3::zeros());
    }

    #[test]
    fn g_conserved_short_flow() {
        let pr = p(1.0, 0.0);
        let traj = integrate_transport(pr, VerticalState::new(0.3, 0.8, 0.6), Generator::Hamiltonian, 1.0, &tight()).unwrap();
        let g = right_invariant_g(traj.states.last().unwrap());
        assert_relative_eq!(g, Vec3::new(-0.3, -0.8, -0.6), epsilon = 1e-9);
    }

    #[test]
    fn casimir_right_examples() {
        assert_eq!(casimir_right(&Vec3::new(-1.0, -1.0, -1.0), p(1.0, 0.0)), 2.0);
        assert_eq!(casimir_right(&Vec3::zeros(), p(1.0, 0.0)), 0.0);
        assert_eq!(casimir_right(&Vec3::new(0.0, 1.0, 0.0), p(1.0, 2.0)), 2.0);
    }

    #[test]
    fn casimir_identity_examples() {
        let s = TransportState::at_identity(VerticalState::new(0.7, -1.3, 2.1));
        assert!(casimir_identity_residual(&s, p(1.4, -0.6)) < 1e-15);
        for (pr, h0, t) in [
            (p(1.0, 0.0), VerticalState::new(1.0, 1.0, 0.0), 5.0),
            (p(2.0, -1.0), VerticalState::new(0.5, 0.2, 0.9), 10.0),
        ] {
            let traj = integrate_transport(pr, h0, Generator::Hamiltonian, t, &tight()).unwrap();
            let worst = traj.states.iter().map(|s| casimir_identity_residual(s, pr)).fold(0.0, f64::max);
            assert!(worst < 1e-9, "{worst}");
        }
    }

    #[test]
    fn frame_coefficients_examples() {
        let g = frame_coefficient_derivatives(p(0.8, -0.3), &VerticalState::new(1.0, 0.0, 0.0));
        let mut expected = Mat3::zeros();
        expected[(1, 2)] = 1.0;
        expected[(2, 1)] = -1.0;
        assert_eq!(g, expected);
        let g = frame_coefficient_derivatives(p(1.0, 0.0), &VerticalState::new(0.0, 1.0, 0.0));
        let mut expected = Mat3::zeros();
        expected[(0, 2)] = 1.0;
        expected[(2, 0)] = -1.0;
        assert_eq!(g, expected);
        assert_eq!(frame_coefficient_derivatives(p(2.0, 1.0), &VerticalState::default()), Mat3::zeros());
    }

    #[test]
    fn lemma_fd_examples() {
        let h = VerticalState::new(0.37, -1.21, 0.84);
        let res = verify_lemma_fd(p(1.0, 0.0), &h, 1e-4);
        assert!(res.max() < 1e-7, "{res}");
        let res = verify_lemma_fd(p(0.0, 0.0), &h, 1e-4);
        assert!(res.max() < 1e-10, "{res}");
        let coarse = verify_lemma_fd(p(1.0, 0.0), &h, 1e-2).max();
        let fine = verify_lemma_fd(p(1.0, 0.0), &h, 5e-3).max();
        let ratio = coarse / fine;
        assert!((3.5..4.5).contains(&ratio), "{coarse} {fine} {ratio}");
    }

    #[test]
    fn accurate_determinant() {
        assert_eq!(det_accurate(&Mat3::identity()), 1.0);
        let m = Mat3::new(2.0, 0.0, 0.0, 0.0, 3.0, 0.0, 1.0, 0.0, 0.5);
        assert_eq!(det_accurate(&m), 3.0);
        // (2^30 + 1)(2^30 - 1) - 2^60 = -1, lost entirely by the naive formula
        let a = 2f64.powi(30);
        let m = Mat3::new(a + 1.0, a, 0.0, a, a - 1.0, 0.0, 0.0, 0.0, 1.0);
        assert_eq!(m.determinant(), 0.0);
        assert_eq!(det_accurate(&m), -1.0);
    }

    #[test]
    fn matrix_exp_examples() {
        assert_eq!(matrix_exp_3x3(&Mat3::zeros()), Mat3::identity());
        let e = matrix_exp_3x3(&Mat3::from_diagonal(&Vec3::new(1.0, 2.0, 3.0)));
        let expected = Mat3::from_diagonal(&Vec3::new(1f64.exp(), 2f64.exp(), 3f64.exp()));
        assert_relative_eq!(e, expected, max_relative = 1e-14);
        let a = structure_constants(p(0.0, 0.0)).ad(&Vec3::new(0.0, 1.0, 0.0));
        assert_eq!(a * a * a, Mat3::zeros());
        assert_eq!(matrix_exp_3x3(&a), Mat3::identity() + a + a * a / 2.0);
    }

    #[test]
    fn flat_round_trip() {
        let s = TransportState { h: VerticalState::new(1.0, 2.0, 3.0), m: Mat3::from_fn(|r, c| (3 * r + c) as f64) };
        let flat = s.to_flat();
        assert_eq!(flat[3..6], [0.0, 1.0, 2.0]);
        assert_eq!(TransportState::from_flat(&flat), s);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn matrix_exp_doubling_consistency(entries in prop::array::uniform9(-3.3..3.3f64)) {
            let a = Mat3::from_row_slice(&entries);
            prop_assume!(a.column_iter().map(|c| c.abs().sum()).fold(0.0, f64::max) <= 10.0);
            let full = matrix_exp_3x3(&a);
            let half = matrix_exp_3x3(&(a / 2.0));
            let err = (full - half * half).amax() / full.amax();
            prop_assert!(err < 1e-12, "{}", err);
        }

        #[test]
        fn matrix_exp_inverse(entries in prop::array::uniform9(-2.0..2.0f64)) {
            let a = Mat3::from_row_slice(&entries);
            let prod = matrix_exp_3x3(&a) * matrix_exp_3x3(&(-a));
            prop_assert!((prod - Mat3::identity()).amax() < 1e-10 * (1.0 + matrix_exp_3x3(&a).amax().powi(2)));
        }

        #[test]
        fn ad_exp_is_automorphism(chi in 0.0..3.0f64, kappa in -3.0..3.0f64,
                                  v in prop::array::uniform3(-1.0..1.0f64),
                                  x in prop::array::uniform3(-1.0..1.0f64),
                                  y in prop::array::uniform3(-1.0..1.0f64)) {
            // Ad_{exp v} = exp(ad_v) preserves the bracket
            let sc = structure_constants(p(chi, kappa));
            let big = matrix_exp_3x3(&sc.ad(&Vec3::from(v)));
            let (x, y) = (Vec3::from(x), Vec3::from(y));
            let lhs = big * sc.bracket(&x, &y);
            let rhs = sc.bracket(&(big * x), &(big * y));
            prop_assert!((lhs - rhs).amax() < 1e-11 * (1.0 + big.amax().powi(2)));
            prop_assert!((big.determinant() - 1.0).abs() < 1e-11 * (1.0 + big.amax().powi(3)));
        }

        #[test]
        fn lemma_agrees_with_closed_form(chi in 0.0..3.0f64, kappa in -3.0..3.0f64,
                                         h in prop::array::uniform3(-2.0..2.0f64)) {
            let res = verify_lemma_fd(p(chi, kappa), &VerticalState::from(h), 1e-4);
            prop_assert!(res.max() < 1e-7);
        }
    }
}
