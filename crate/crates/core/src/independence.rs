//! Functional independence, involution and superintegrability checks.
//!
//! All Jacobians are evaluated over the identity, in coordinates
//! `(h0, h1, h2; x0, x1, x2)` with `x` linearly adapted to the frame.

use nalgebra::{DMatrix, Matrix4, SMatrix};
use serde::{Deserialize, Serialize};

use crate::algebra::{lie_poisson_bracket, structure_constants, UnimodularParams};
use crate::odeflow::IntegratorConfig;
use crate::sampling::{Sampler, DEFAULT_BOX};
use crate::transport::{
    frame_coefficient_derivatives, integrate_transport, relative_drift, right_invariant_g, Generator,
};
use crate::vertical::{grad_energy, grad_hamiltonian, VerticalState};
use crate::Vec3;

/// Rows `(∇H, ¼∇E, ∇g0, ∇g1, ∇g2)`, columns `(h0, h1, h2, x0, x1, x2)`.
pub type JacobianJ = SMatrix<f64, 5, 6>;

pub const ROW_H: usize = 0;
pub const ROW_E: usize = 1;
pub const ROW_G0: usize = 2;
pub const COL_X0: usize = 3;

/// Jacobian of the five integrals at a covector over the identity.
pub fn jacobian_at_identity(h: &VerticalState, params: UnimodularParams) -> JacobianJ {
    let chi = params.chi();
    let mut j = JacobianJ::zeros();
    j[(ROW_H, 1)] = h.h1;
    j[(ROW_H, 2)] = h.h2;
    j[(ROW_E, 0)] = h.h0;
    j[(ROW_E, 1)] = -chi * h.h1;
    j[(ROW_E, 2)] = chi * h.h2;
    let gij = frame_coefficient_derivatives(params, h);
    for i in 0..3 {
        j[(ROW_G0 + i, i)] = -1.0;
        for c in 0..3 {
            j[(ROW_G0 + i, COL_X0 + c)] = gij[(i, c)];
        }
    }
    j
}

/// Singular values in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Number of singular values above `tol_factor · σ_max · max(rows, cols)`.
pub fn numerical_rank(m: &DMatrix<f64>, tol_factor: f64) -> usize {
    let s = singular_values(m);
    let Some(&smax) = s.first() else { return 0 };
    if smax == 0.0 {
        return 0;
    }
    let cutoff = tol_factor * smax * m.nrows().max(m.ncols()) as f64;
    s.iter().filter(|&&x| x > cutoff).count()
}

pub fn to_dynamic<const R: usize, const C: usize>(m: &SMatrix<f64, R, C>) -> DMatrix<f64> {
    DMatrix::from_fn(R, C, |r, c| m[(r, c)])
}

/// Determinant of the square submatrix picked by `rows` and `cols`.
pub fn jacobian_minor(j: &JacobianJ, rows: &[usize], cols: &[usize]) -> f64 {
    assert_eq!(rows.len(), cols.len(), "minor must be square");
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| j[(rows[r], cols[c])]).determinant()
}

const ROWS_HG: [usize; 4] = [0, 2, 3, 4];

/// `det ∂(H, g0, g1, g2)/∂(h0, h1, h2, x1)`, evaluated as a determinant.
///
/// Expanding the submatrix gives `-h0 h2`; the `x2` column instead gives
/// `h0 h1` (see [`minor_det_hggg_x2`]).
pub fn minor_det_hggg(h: &VerticalState, params: UnimodularParams) -> f64 {
    jacobian_minor(&jacobian_at_identity(h, params), &ROWS_HG, &[0, 1, 2, COL_X0 + 1])
}

/// `det ∂(H, g0, g1, g2)/∂(h0, h1, h2, x2) = h0 h1`, nonzero exactly on the
/// set where the four integrals are claimed independent.
pub fn minor_det_hggg_x2(h: &VerticalState, params: UnimodularParams) -> f64 {
    jacobian_minor(&jacobian_at_identity(h, params), &ROWS_HG, &[0, 1, 2, COL_X0 + 2])
}

/// `det` of the rows `(∇_h H, ¼∇_h E, α)`.
///
/// Over the identity `∇_h g_i = -f_i`, so the determinant of the actual
/// gradients of `(H, E, α·g)` differs from this by a factor `-4`; only its
/// vanishing matters.
pub fn involution_determinant(h: &VerticalState, params: UnimodularParams, alpha: &Vec3) -> f64 {
    let chi = params.chi();
    nalgebra::Matrix3::new(
        0.0, h.h1, h.h2,
        h.h0, -chi * h.h1, chi * h.h2,
        alpha[0], alpha[1], alpha[2],
    )
    .determinant()
}

/// True when `α` is allowed for the given parameters: nonzero, and with
/// `α1² + α2² ≠ 0` when `chi = 0`.
pub fn alpha_admissible(params: UnimodularParams, alpha: &Vec3) -> bool {
    if params.chi() != 0.0 {
        alpha.iter().any(|&a| a != 0.0)
    } else {
        alpha[1] != 0.0 || alpha[2] != 0.0
    }
}

/// Thresholds and horizons of [`liouville_triple_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleSettings {
    pub bracket_tol: f64,
    pub drift_tol: f64,
    pub independence_tol: f64,
    /// Number of states whose H- and E-flows are integrated.
    pub flow_samples: usize,
    pub flow_horizon: f64,
    /// Half-width of the box the flow states are drawn from.
    pub flow_box: f64,
    pub flow_config: IntegratorConfig,
}

impl Default for LiouvilleSettings {
    fn default() -> Self {
        Self {
            bracket_tol: 1e-10,
            drift_tol: 1e-8,
            independence_tol: 1e-6,
            flow_samples: 8,
            flow_horizon: 1.0,
            flow_box: 1.0,
            flow_config: IntegratorConfig::adaptive(1e-12, 1e-14),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleReport {
    pub alpha: [f64; 3],
    pub admissible: bool,
    /// Largest `|{H, E}|` over the sampled states.
    pub max_bracket_he: f64,
    /// Largest relative drift of `α·g` along the H-flows.
    pub max_drift_h_flow: f64,
    /// Largest relative drift of `α·g` along the E-flows.
    pub max_drift_e_flow: f64,
    pub flow_failures: usize,
    /// Sample index of the first state with a nonvanishing determinant.
    pub independent_at: Option<usize>,
    pub max_abs_determinant: f64,
    pub involution: bool,
    pub independence: bool,
    pub pass: bool,
}

/// Checks that `H, E, g = α·(g0, g1, g2)` are in involution and independent.
///
/// `{H, E}` is evaluated directly; `{H, g}` and `{E, g}` vanish iff `g` is
/// conserved along the H- and E-flows, which is checked by transport.
pub fn liouville_triple_check(
    params: UnimodularParams,
    alpha: &Vec3,
    n_samples: usize,
    seed: u64,
    settings: &LiouvilleSettings,
) -> LiouvilleReport {
    let mut sampler = Sampler::stream(seed, 0x11);
    let mut max_bracket_he = 0.0f64;
    let mut independent_at = None;
    let mut max_abs_det = 0.0f64;
    for idx in 0..n_samples {
        let h = sampler.state(DEFAULT_BOX);
        let b = lie_poisson_bracket(&grad_hamiltonian(&h), &grad_energy(&h, params), &h, params);
        max_bracket_he = max_bracket_he.max(b.abs());
        let det = involution_determinant(&h, params, alpha).abs();
        max_abs_det = max_abs_det.max(det);
        if independent_at.is_none() && det > settings.independence_tol {
            independent_at = Some(idx);
        }
    }

    let mut flows = Sampler::stream(seed, 0x12);
    let mut max_h = 0.0f64;
    let mut max_e = 0.0f64;
    let mut flow_failures = 0;
    for _ in 0..settings.flow_samples.min(n_samples) {
        let h0 = flows.state(settings.flow_box);
        for (generator, worst) in [(Generator::Hamiltonian, &mut max_h), (Generator::Energy, &mut max_e)] {
            match integrate_transport(params, h0, generator, settings.flow_horizon, &settings.flow_config) {
                Ok(traj) => {
                    let g_of = |s| alpha.dot(&right_invariant_g(s));
                    let g0 = g_of(&traj.states[0]);
                    for s in &traj.states {
                        *worst = worst.max(relative_drift(g_of(s), g0));
                    }
                }
                Err(_) => flow_failures += 1,
            }
        }
    }

    let involution = max_bracket_he < settings.bracket_tol
        && max_h < settings.drift_tol
        && max_e < settings.drift_tol
        && flow_failures == 0;
    let independence = independent_at.is_some();
    LiouvilleReport {
        alpha: [alpha[0], alpha[1], alpha[2]],
        admissible: alpha_admissible(params, alpha),
        max_bracket_he,
        max_drift_h_flow: max_h,
        max_drift_e_flow: max_e,
        flow_failures,
        independent_at,
        max_abs_determinant: max_abs_det,
        involution,
        independence,
        pass: involution && independence,
    }
}

/// Bracket matrix of `(H, g0, g1, g2)`; index 0 is `H`.
pub type PoissonMatrixP = Matrix4<f64>;

/// `{g2, g1} = g0`, `{g1, g0} = (chi + kappa) g2`, `{g2, g0} = (chi - kappa) g1`,
/// and `H` commutes with every `g_i`.
pub fn poisson_matrix_p(g: &Vec3, params: UnimodularParams) -> PoissonMatrixP {
    let (chi, kappa) = (params.chi(), params.kappa());
    let mut p = PoissonMatrixP::zeros();
    let mut set = |a: usize, b: usize, v: f64| {
        p[(a, b)] = v;
        p[(b, a)] = -v;
    };
    set(3, 2, g[0]);
    set(2, 1, (chi + kappa) * g[2]);
    set(3, 1, (chi - kappa) * g[1]);
    p
}

/// The same matrix assembled from the structure constants,
/// `{g_i, g_j} = Σ_k c[i][j][k] g_k`.
pub fn poisson_matrix_from_constants(g: &Vec3, params: UnimodularParams) -> PoissonMatrixP {
    let sc = structure_constants(params);
    let mut p = PoissonMatrixP::zeros();
    for i in 0..3 {
        for j in 0..3 {
            p[(1 + i, 1 + j)] = (0..3).map(|k| sc.get(i, j, k) * g[k]).sum();
        }
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperintegrabilitySettings {
    pub rank_tol: f64,
    /// Lower bound on `|h0 h1|` for the independence samples.
    pub min_h0h1: f64,
    pub state_box: f64,
}

impl Default for SuperintegrabilitySettings {
    fn default() -> Self {
        Self { rank_tol: DEFAULT_RANK_TOL, min_h0h1: 0.01, state_box: DEFAULT_BOX }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperintegrabilityReport {
    pub samples: usize,
    /// Samples where rows `(H, g0, g1, g2)` of J had rank below 4.
    pub rank_four_failures: usize,
    /// Samples where the full J did not have rank 4.
    pub full_rank_failures: usize,
    pub min_rank_sub: usize,
    pub max_rank_sub: usize,
    /// Samples where P did not have rank 2.
    pub rank_p_failures: usize,
    pub min_rank_p: usize,
    pub max_rank_p: usize,
    /// Largest deviation of P from the structure-constant assembly.
    pub closure_residual: f64,
    /// Largest `|P + Pᵀ|` or first-row entry.
    pub structure_residual: f64,
    pub independence: bool,
    pub rank_p: bool,
    pub closure: bool,
    pub pass: bool,
}

pub fn superintegrability_check(
    params: UnimodularParams,
    n_samples: usize,
    seed: u64,
    settings: &SuperintegrabilitySettings,
) -> SuperintegrabilityReport {
    let mut states = Sampler::stream(seed, 0x21);
    let mut values = Sampler::stream(seed, 0x22);
    let mut rep = SuperintegrabilityReport {
        samples: n_samples,
        rank_four_failures: 0,
        full_rank_failures: 0,
        min_rank_sub: usize::MAX,
        max_rank_sub: 0,
        rank_p_failures: 0,
        min_rank_p: usize::MAX,
        max_rank_p: 0,
        closure_residual: 0.0,
        structure_residual: 0.0,
        independence: false,
        rank_p: false,
        closure: false,
        pass: false,
    };
    let mut taken = 0;
    while taken < n_samples {
        let h = states.state(settings.state_box);
        if (h.h0 * h.h1).abs() <= settings.min_h0h1 {
            continue;
        }
        taken += 1;
        let j = jacobian_at_identity(&h, params);
        let sub = DMatrix::from_fn(4, 6, |r, c| j[(ROWS_HG[r], c)]);
        let rank_sub = numerical_rank(&sub, settings.rank_tol);
        rep.min_rank_sub = rep.min_rank_sub.min(rank_sub);
        rep.max_rank_sub = rep.max_rank_sub.max(rank_sub);
        if rank_sub != 4 {
            rep.rank_four_failures += 1;
        }
        if numerical_rank(&to_dynamic(&j), settings.rank_tol) != 4 {
            rep.full_rank_failures += 1;
        }

        let g = values.state(settings.state_box).to_vec();
        let p = poisson_matrix_p(&g, params);
        let rank_p = numerical_rank(&to_dynamic(&p), settings.rank_tol);
        rep.min_rank_p = rep.min_rank_p.min(rank_p);
        rep.max_rank_p = rep.max_rank_p.max(rank_p);
        if rank_p != 2 {
            rep.rank_p_failures += 1;
        }
        rep.closure_residual = rep
            .closure_residual
            .max((p - poisson_matrix_from_constants(&g, params)).amax());
        let first_row = p.row(0).amax().max(p.column(0).amax());
        rep.structure_residual = rep.structure_residual.max((p + p.transpose()).amax()).max(first_row);
    }
    if n_samples == 0 {
        rep.min_rank_sub = 0;
        rep.min_rank_p = 0;
    }
    rep.independence = rep.rank_four_failures == 0;
    rep.rank_p = rep.rank_p_failures == 0;
    rep.closure = rep.closure_residual == 0.0 && rep.structure_residual == 0.0;
    rep.pass = rep.independence && rep.rank_p && rep.closure;
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(chi: f64, kappa: f64) -> UnimodularParams {
        UnimodularParams::new(chi, kappa).unwrap()
    }

    /// Leibniz expansion over all permutations, independent of LU.
    fn leibniz(m: &DMatrix<f64>) -> f64 {
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = vec![];
            for p in perms(n - 1) {
                for pos in 0..n {
                    let mut q = p.clone();
                    q.insert(pos, n - 1);
                    out.push(q);
                }
            }
            out
        }
        let n = m.nrows();
        perms(n)
            .into_iter()
            .map(|perm| {
                let inversions = (0..n)
                    .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                    .filter(|&(a, b)| perm[a] > perm[b])
                    .count();
                let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
                sign * (0..n).map(|r| m[(r, perm[r])]).product::<f64>()
            })
            .sum()
    }

    fn sub(j: &JacobianJ, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |r, c| j[(rows[r], cols[c])])
    }

    #[test]
    fn jacobian_examples() {
        let j = jacobian_at_identity(&VerticalState::new(1.0, 0.0, 0.0), p(0.9, -0.4));
        let mut right = SMatrix::<f64, 3, 3>::zeros();
        right[(1, 2)] = 1.0;
        right[(2, 1)] = -1.0;
        assert_eq!(j.fixed_view::<3, 3>(2, 3).into_owned(), right);

        let j = jacobian_at_identity(&VerticalState::default(), p(1.0, 0.5));
        assert_eq!(j.fixed_view::<2, 6>(0, 0).into_owned(), SMatrix::<f64, 2, 6>::zeros());
        assert_eq!(numerical_rank(&to_dynamic(&j), DEFAULT_RANK_TOL), 3);

        let j = jacobian_at_identity(&VerticalState::new(1.0, 1.0, 1.0), p(1.0, 0.0));
        assert_eq!(j[(ROW_E, 1)], -1.0);
        assert_eq!(j[(ROW_E, 2)], 1.0);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numerical_rank(&DMatrix::identity(3, 3), DEFAULT_RANK_TOL), 3);
        let u = nalgebra::DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let v = nalgebra::DVector::from_vec(vec![3.0, 0.25, 1.0, -4.0]);
        assert_eq!(numerical_rank(&(&u * v.transpose()), DEFAULT_RANK_TOL), 1);
        assert_eq!(numerical_rank(&DMatrix::zeros(2, 3), DEFAULT_RANK_TOL), 0);
        let j = jacobian_at_identity(&VerticalState::new(0.8, -1.1, 0.3), p(1.0, 0.0));
        assert_eq!(numerical_rank(&to_dynamic(&j), DEFAULT_RANK_TOL), 4);
    }

    // Values frozen from the Leibniz oracle above: the x1 minor is -h0 h2.
    #[test]
    fn hggg_minor_examples() {
        let h = VerticalState::new(2.0, 3.0, 5.0);
        assert!((minor_det_hggg(&h, p(0.7, -1.3)) - (-10.0)).abs() < 1e-12);
        assert!((minor_det_hggg_x2(&h, p(0.7, -1.3)) - 6.0).abs() < 1e-12);
        assert_eq!(minor_det_hggg(&VerticalState::new(0.0, 1.5, -2.0), p(1.0, 2.0)), 0.0);
        let h = VerticalState::new(1.0, 1.0, 5.0);
        for (chi, kappa) in [(0.0, 0.0), (1.0, 0.0), (2.0, -3.0)] {
            assert!((minor_det_hggg(&h, p(chi, kappa)) + 5.0).abs() < 1e-12);
            assert!((minor_det_hggg_x2(&h, p(chi, kappa)) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn involution_examples() {
        let e1 = Vec3::new(0.0, 1.0, 0.0);
        assert_eq!(involution_determinant(&VerticalState::new(1.0, 1.0, 0.0), p(0.0, 0.0), &e1), 0.0);
        assert_eq!(involution_determinant(&VerticalState::new(1.0, 1.0, 1.0), p(0.0, 0.0), &e1), 1.0);
        let e0 = Vec3::new(1.0, 0.0, 0.0);
        let mut s = Sampler::new(3);
        for _ in 0..50 {
            assert_eq!(involution_determinant(&s.state(2.0), p(0.0, 1.7), &e0), 0.0);
        }
    }

    #[test]
    fn poisson_matrix_examples() {
        let pm = poisson_matrix_p(&Vec3::new(1.0, 0.0, 0.0), p(0.6, 1.9));
        let mut expected = PoissonMatrixP::zeros();
        expected[(3, 2)] = 1.0;
        expected[(2, 3)] = -1.0;
        assert_eq!(pm, expected);
        assert_eq!(poisson_matrix_p(&Vec3::zeros(), p(1.0, 1.0)), PoissonMatrixP::zeros());
        let pm = poisson_matrix_p(&Vec3::new(0.0, 1.0, 0.0), p(1.0, 0.0));
        assert_eq!(pm[(3, 1)], 1.0);
        assert_eq!(pm[(1, 3)], -1.0);
        assert_eq!(numerical_rank(&to_dynamic(&poisson_matrix_p(&Vec3::zeros(), p(1.0, 0.0))), DEFAULT_RANK_TOL), 0);
        let pm = poisson_matrix_p(&Vec3::new(0.4, -1.2, 0.9), p(0.0, 0.0));
        assert_eq!(numerical_rank(&to_dynamic(&pm), DEFAULT_RANK_TOL), 2);
    }

    #[test]
    fn liouville_examples() {
        let set = LiouvilleSettings::default();
        let r = liouville_triple_check(p(1.0, 0.0), &Vec3::new(1.0, 0.0, 0.0), 100, 42, &set);
        assert!(r.pass, "{r:?}");
        let r = liouville_triple_check(p(0.0, 1.0), &Vec3::new(1.0, 0.0, 0.0), 100, 42, &set);
        assert!(!r.admissible);
        assert!(r.involution && !r.independence && !r.pass, "{r:?}");
        let r = liouville_triple_check(p(0.0, 1.0), &Vec3::new(0.0, 1.0, 1.0), 100, 42, &set);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn superintegrability_examples() {
        let r = superintegrability_check(p(1.0, 0.0), 100, 1, &SuperintegrabilitySettings::default());
        assert!(r.pass, "{r:?}");
        assert_eq!((r.min_rank_sub, r.max_rank_sub, r.min_rank_p, r.max_rank_p), (4, 4, 2, 2));
        let r = superintegrability_check(p(0.0, 0.0), 50, 1, &SuperintegrabilitySettings::default());
        assert!(r.pass, "{r:?}");
    }

    proptest! {
        #[test]
        fn minors_match_leibniz(chi in 0.0..3.0f64, kappa in -3.0..3.0f64, h in prop::array::uniform3(-2.0..2.0f64)) {
            let h = VerticalState::from(h);
            let j = jacobian_at_identity(&h, p(chi, kappa));
            let x1 = leibniz(&sub(&j, &ROWS_HG, &[0, 1, 2, 4]));
            let x2 = leibniz(&sub(&j, &ROWS_HG, &[0, 1, 2, 5]));
            prop_assert!((minor_det_hggg(&h, p(chi, kappa)) - x1).abs() < 1e-12);
            prop_assert!((minor_det_hggg_x2(&h, p(chi, kappa)) - x2).abs() < 1e-12);
            prop_assert!((x1 + h.h0 * h.h2).abs() < 1e-12);
            prop_assert!((x2 - h.h0 * h.h1).abs() < 1e-12);
        }

        #[test]
        fn involution_determinant_expansion(chi in 0.0..3.0f64, h in prop::array::uniform3(-2.0..2.0f64),
                                            a in prop::array::uniform3(-2.0..2.0f64)) {
            let h = VerticalState::from(h);
            let a = Vec3::from(a);
            let expansion = 2.0 * chi * a[0] * h.h1 * h.h2 + a[1] * h.h0 * h.h2 - a[2] * h.h0 * h.h1;
            prop_assert!((involution_determinant(&h, p(chi, 0.3), &a) - expansion).abs() < 1e-12);
        }

        #[test]
        fn jacobian_rank_at_most_four(chi in 0.0..3.0f64, kappa in -3.0..3.0f64, h in prop::array::uniform3(-2.0..2.0f64)) {
            let j = to_dynamic(&jacobian_at_identity(&VerticalState::from(h), p(chi, kappa)));
            let s = singular_values(&j);
            prop_assert!(s[4] < 1e-9 * s[0]);
        }

        #[test]
        fn poisson_matrix_structure(chi in 0.0..3.0f64, kappa in -3.0..3.0f64, g in prop::array::uniform3(-2.0..2.0f64)) {
            let g = Vec3::from(g);
            let pm = poisson_matrix_p(&g, p(chi, kappa));
            prop_assert_eq!(pm + pm.transpose(), PoissonMatrixP::zeros());
            prop_assert_eq!(pm.row(0).amax(), 0.0);
            prop_assert_eq!(pm, poisson_matrix_from_constants(&g, p(chi, kappa)));
        }
    }
}
