//! The two-parameter family of 3D unimodular Lie algebras.
//!
//! Indices always refer to the ordered basis `(f0, f1, f2)`, where `f0` is
//! the bracket-generated direction and `f1, f2` span the distribution.

use std::fmt;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vertical::VerticalState;
use crate::{Mat3, Vec3};

/// The invariant pair `(chi, kappa)` of a contact structure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnimodularParams {
    chi: f64,
    kappa: f64,
}

impl UnimodularParams {
    pub fn new(chi: f64, kappa: f64) -> Result<Self> {
        if !chi.is_finite() || !kappa.is_finite() {
            return Err(Error::NonFiniteParams { chi, kappa });
        }
        if chi < 0.0 {
            return Err(Error::NegativeChi(chi));
        }
        Ok(Self { chi, kappa })
    }

    #[inline]
    pub fn chi(&self) -> f64 {
        self.chi
    }

    #[inline]
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn structure_constants(&self) -> StructureConstants {
        structure_constants(*self)
    }

    pub fn classify(&self) -> AlgebraClass {
        classify(*self)
    }
}

/// Structure constants `c[i][j][k]` with `[f_i, f_j] = Σ_k c[i][j][k] f_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureConstants {
    c: [[[f64; 3]; 3]; 3],
}

impl StructureConstants {
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[i][j][k]
    }

    pub fn tensor(&self) -> &[[[f64; 3]; 3]; 3] {
        &self.c
    }

    /// Coordinates of `[x, y]`.
    pub fn bracket(&self, x: &Vec3, y: &Vec3) -> Vec3 {
        let mut out = Vec3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let xy = x[i] * y[j];
                if xy == 0.0 {
                    continue;
                }
                for k in 0..3 {
                    out[k] += xy * self.c[i][j][k];
                }
            }
        }
        out
    }

    /// Matrix of `ad_v`: column `j` holds the coordinates of `[v, f_j]`.
    pub fn ad(&self, v: &Vec3) -> Mat3 {
        let mut m = Mat3::zeros();
        for i in 0..3 {
            if v[i] == 0.0 {
                continue;
            }
            for j in 0..3 {
                for k in 0..3 {
                    m[(k, j)] += v[i] * self.c[i][j][k];
                }
            }
        }
        m
    }

    /// Largest `|c[i][j][k] + c[j][i][k]|`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    worst = worst.max((self.c[i][j][k] + self.c[j][i][k]).abs());
                }
            }
        }
        worst
    }

    /// Largest absolute cyclic Jacobi sum over all index quadruples.
    pub fn jacobi_residual(&self) -> f64 {
        let c = &self.c;
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let s: f64 = (0..3)
                            .map(|m| {
                                c[i][j][m] * c[m][k][l]
                                    + c[j][k][m] * c[m][i][l]
                                    + c[k][i][m] * c[m][j][l]
                            })
                            .sum();
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }
}

/// Builds the tensor from the three defining brackets and their mirrors.
pub fn structure_constants(params: UnimodularParams) -> StructureConstants {
    let (chi, kappa) = (params.chi, params.kappa);
    let mut c = [[[0.0; 3]; 3]; 3];
    let mut set = |i: usize, j: usize, k: usize, v: f64| {
        c[i][j][k] = v;
        c[j][i][k] = -v;
    };
    set(2, 1, 0, 1.0);
    set(1, 0, 2, chi + kappa);
    set(2, 0, 1, chi - kappa);
    StructureConstants { c }
}

pub fn ad_matrix(params: UnimodularParams, v: &Vec3) -> Mat3 {
    structure_constants(params).ad(v)
}

/// `K(x, y) = tr(ad_x ∘ ad_y)` in the frame basis.
pub fn killing_form(params: UnimodularParams) -> Mat3 {
    let sc = structure_constants(params);
    let ads: Vec<Mat3> = (0..3).map(|i| sc.ad(&Vec3::ith(i, 1.0))).collect();
    Mat3::from_fn(|a, b| (ads[a] * ads[b]).trace())
}

/// Counts of negative, zero and positive eigenvalues of a symmetric form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} negative, {} zero, {} positive", self.negative, self.zero, self.positive)
    }
}

/// Relative threshold under which a Killing eigenvalue counts as zero.
pub const KILLING_ZERO_TOL: f64 = 1e-10;

pub fn killing_signature(params: UnimodularParams) -> Signature {
    let eig = SymmetricEigen::new(killing_form(params)).eigenvalues;
    let scale = eig.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    let tol = KILLING_ZERO_TOL * (1.0 + scale);
    let mut sig = Signature { negative: 0, zero: 0, positive: 0 };
    for &e in eig.iter() {
        if e.abs() <= tol {
            sig.zero += 1;
        } else if e < 0.0 {
            sig.negative += 1;
        } else {
            sig.positive += 1;
        }
    }
    sig
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgebraClass {
    H3,
    So3,
    Sl2,
    Se2,
    Sh2,
}

impl AlgebraClass {
    pub const ALL: [AlgebraClass; 5] = [
        AlgebraClass::H3,
        AlgebraClass::So3,
        AlgebraClass::Sl2,
        AlgebraClass::Se2,
        AlgebraClass::Sh2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgebraClass::H3 => "h3",
            AlgebraClass::So3 => "so3",
            AlgebraClass::Sl2 => "sl2",
            AlgebraClass::Se2 => "se2",
            AlgebraClass::Sh2 => "sh2",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            AlgebraClass::H3 => "Heisenberg",
            AlgebraClass::So3 => "rotations of 3-space",
            AlgebraClass::Sl2 => "special linear 2x2",
            AlgebraClass::Se2 => "Euclidean motions of the plane",
            AlgebraClass::Sh2 => "hyperbolic motions of the plane",
        }
    }

    /// A fixed parameter point inside the class.
    pub fn representative(self) -> UnimodularParams {
        let (chi, kappa) = match self {
            AlgebraClass::H3 => (0.0, 0.0),
            AlgebraClass::So3 => (0.5, 2.0),
            AlgebraClass::Sl2 => (2.0, 0.5),
            AlgebraClass::Se2 => (1.0, 1.0),
            AlgebraClass::Sh2 => (1.0, -1.0),
        };
        UnimodularParams { chi, kappa }
    }
}

impl fmt::Display for AlgebraClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Classifies the algebra by the signature of its Killing form.
///
/// A vanishing form is nilpotent (`h3`). A form of rank one is solvable:
/// its single nonzero eigenvalue is negative for `se2` (compact rotation
/// part) and positive for `sh2`. Nondegenerate forms are simple: negative
/// definite means `so3`, indefinite means `sl2`.
pub fn classify(params: UnimodularParams) -> AlgebraClass {
    let sig = killing_signature(params);
    match (sig.negative, sig.zero, sig.positive) {
        (_, 3, _) => AlgebraClass::H3,
        (3, 0, 0) => AlgebraClass::So3,
        (_, 0, _) => AlgebraClass::Sl2,
        (n, _, p) if n > 0 && p == 0 => AlgebraClass::Se2,
        _ => AlgebraClass::Sh2,
    }
}

/// Lie–Poisson bracket of two functions of the momenta, given their
/// gradients at `h`: `{F, G}(h) = Σ c[i][j][k] h_k ∂_i F ∂_j G`.
pub fn lie_poisson_bracket(
    grad_f: &Vec3,
    grad_g: &Vec3,
    h: &VerticalState,
    params: UnimodularParams,
) -> f64 {
    let hv = h.to_vec();
    structure_constants(params).bracket(grad_f, grad_g).dot(&hv)
}

/// Step policy for central finite differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FdStep {
    /// `step_i = rel * (1 + |x_i|)`.
    Relative(f64),
    Absolute(f64),
}

impl Default for FdStep {
    fn default() -> Self {
        FdStep::Relative(1e-6)
    }
}

/// Central finite-difference gradient of `f` at `x`.
pub fn fd_gradient<F>(f: F, x: &Vec3, step: FdStep) -> Vec3
where
    F: Fn(&Vec3) -> f64,
{
    let mut grad = Vec3::zeros();
    for i in 0..3 {
        let s = match step {
            FdStep::Relative(r) => r * (1.0 + x[i].abs()),
            FdStep::Absolute(a) => a,
        };
        let mut plus = *x;
        let mut minus = *x;
        plus[i] += s;
        minus[i] -= s;
        grad[i] = (f(&plus) - f(&minus)) / (plus[i] - minus[i]);
    }
    grad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vertical::{casimir_left, energy_e, hamiltonian_h};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p(chi: f64, kappa: f64) -> UnimodularParams {
        UnimodularParams::new(chi, kappa).unwrap()
    }

    fn nonzero_entries(sc: &StructureConstants) -> Vec<(usize, usize, usize, f64)> {
        let mut out = vec![];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    if sc.get(i, j, k) != 0.0 {
                        out.push((i, j, k, sc.get(i, j, k)));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn rejects_bad_params() {
        assert_eq!(UnimodularParams::new(-0.1, 0.0), Err(Error::NegativeChi(-0.1)));
        assert!(UnimodularParams::new(f64::NAN, 0.0).is_err());
        assert!(UnimodularParams::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn heisenberg_constants() {
        let sc = structure_constants(p(0.0, 0.0));
        assert_eq!(nonzero_entries(&sc), vec![(1, 2, 0, -1.0), (2, 1, 0, 1.0)]);
    }

    #[test]
    fn substituted_constants() {
        let sc = structure_constants(p(1.0, 1.0));
        assert_eq!(sc.get(2, 1, 0), 1.0);
        assert_eq!(sc.get(1, 0, 2), 2.0);
        assert_eq!(sc.get(2, 0, 1), 0.0);
        let sc = structure_constants(p(1.0, -1.0));
        assert_eq!(sc.get(2, 1, 0), 1.0);
        assert_eq!(sc.get(1, 0, 2), 0.0);
        assert_eq!(sc.get(2, 0, 1), 2.0);
    }

    #[test]
    fn ad_of_f1_in_heisenberg() {
        let m = ad_matrix(p(0.0, 0.0), &Vec3::new(0.0, 1.0, 0.0));
        let mut expected = Mat3::zeros();
        expected[(0, 2)] = -1.0;
        assert_eq!(m, expected);
        assert_eq!(ad_matrix(p(1.3, -0.2), &Vec3::zeros()), Mat3::zeros());
    }

    #[test]
    fn ad_of_f0_matches_bracket_table() {
        // [f0, f1] = -(chi + kappa) f2, [f0, f2] = -(chi - kappa) f1 with chi = 1, kappa = 0
        let m = ad_matrix(p(1.0, 0.0), &Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(m.column(0).into_owned(), Vec3::zeros());
        assert_eq!(m.column(1).into_owned(), Vec3::new(0.0, 0.0, -1.0));
        assert_eq!(m.column(2).into_owned(), Vec3::new(0.0, -1.0, 0.0));
    }

    // Closed form worked out by hand from the bracket table:
    // K = diag(2(chi² - kappa²), -2(chi + kappa), 2(chi - kappa)).
    fn killing_closed_form(chi: f64, kappa: f64) -> Mat3 {
        Mat3::from_diagonal(&Vec3::new(
            2.0 * (chi * chi - kappa * kappa),
            -2.0 * (chi + kappa),
            2.0 * (chi - kappa),
        ))
    }

    #[test]
    fn killing_examples() {
        assert_eq!(killing_form(p(0.0, 0.0)), Mat3::zeros());
        let k = killing_form(p(0.0, 1.0));
        assert_eq!(k, Mat3::from_diagonal(&Vec3::new(-2.0, -2.0, -2.0)));
        assert_eq!(killing_signature(p(0.0, 1.0)).negative, 3);
        let k = killing_form(p(1.0, 1.0));
        assert_eq!(k, Mat3::from_diagonal(&Vec3::new(0.0, -4.0, 0.0)));
        assert_eq!(k.determinant(), 0.0);
    }

    #[test]
    fn classify_representatives() {
        assert_eq!(classify(p(0.0, 0.0)), AlgebraClass::H3);
        assert_eq!(classify(p(1.0, 1.0)), AlgebraClass::Se2);
        assert_eq!(classify(p(1.0, -1.0)), AlgebraClass::Sh2);
        assert_eq!(classify(p(0.5, 2.0)), AlgebraClass::So3);
        assert_eq!(classify(p(2.0, 0.5)), AlgebraClass::Sl2);
        assert_eq!(classify(p(0.0, 1.0)), AlgebraClass::So3);
        assert_eq!(classify(p(0.0, -1.0)), AlgebraClass::Sl2);
        for class in AlgebraClass::ALL {
            assert_eq!(classify(class.representative()), class);
        }
    }

    #[test]
    fn brackets_on_momenta() {
        let h = VerticalState::new(3.0, 1.0, 2.0);
        let grad_h = Vec3::new(0.0, h.h1, h.h2);
        let any = p(0.7, -1.1);
        assert_eq!(lie_poisson_bracket(&grad_h, &Vec3::new(0.0, 1.0, 0.0), &h, any), 6.0);
        assert_eq!(lie_poisson_bracket(&grad_h, &Vec3::new(0.0, 0.0, 1.0), &h, any), -3.0);
        let chi2 = p(2.0, 0.3);
        assert_eq!(lie_poisson_bracket(&grad_h, &Vec3::new(1.0, 0.0, 0.0), &h, chi2), 8.0);
        let g = Vec3::new(0.4, -2.0, 1.5);
        assert_eq!(lie_poisson_bracket(&g, &g, &h, chi2), 0.0);
    }

    #[test]
    fn fd_gradient_examples() {
        let pr = p(1.0, 2.0);
        let grad = fd_gradient(|x| hamiltonian_h(&VerticalState::from(*x)), &Vec3::new(0.0, 3.0, 4.0), FdStep::default());
        assert_relative_eq!(grad, Vec3::new(0.0, 3.0, 4.0), epsilon = 1e-8);
        let grad = fd_gradient(|x| energy_e(&VerticalState::from(*x), p(1.0, 0.0)), &Vec3::new(1.0, 1.0, 0.0), FdStep::default());
        assert_relative_eq!(grad, Vec3::new(4.0, -4.0, 0.0), epsilon = 1e-8);
        let grad = fd_gradient(|x| casimir_left(&VerticalState::from(*x), pr), &Vec3::new(1.0, 1.0, 1.0), FdStep::default());
        assert_relative_eq!(grad, Vec3::new(4.0, 4.0, 12.0), epsilon = 1e-8);
    }

    #[test]
    fn degenerate_killing_lines() {
        for &(chi, kappa) in &[(0.0, 0.0), (1.0, 1.0), (2.5, -2.5), (0.3, 0.3)] {
            assert!(killing_form(p(chi, kappa)).determinant().abs() < 1e-12);
        }
        for &(chi, kappa) in &[(0.0, 1.0), (2.0, 0.5), (1.0, 0.0), (0.5, 2.0), (3.0, -1.0)] {
            assert!(killing_form(p(chi, kappa)).determinant().abs() > 1e-6);
        }
    }

    proptest! {
        #[test]
        fn constants_are_antisymmetric_and_satisfy_jacobi(chi in 0.0..3.0f64, kappa in -3.0..3.0f64) {
            let sc = structure_constants(p(chi, kappa));
            prop_assert_eq!(sc.antisymmetry_residual(), 0.0);
            prop_assert!(sc.jacobi_residual() <= 1e-14);
        }

        #[test]
        fn ad_is_a_homomorphism(
            chi in 0.0..3.0f64, kappa in -3.0..3.0f64,
            x in prop::array::uniform3(-2.0..2.0f64),
            y in prop::array::uniform3(-2.0..2.0f64),
        ) {
            let sc = structure_constants(p(chi, kappa));
            let (x, y) = (Vec3::from(x), Vec3::from(y));
            let lhs = sc.ad(&sc.bracket(&x, &y));
            let rhs = sc.ad(&x) * sc.ad(&y) - sc.ad(&y) * sc.ad(&x);
            prop_assert!((lhs - rhs).amax() < 1e-12);
            prop_assert!(sc.ad(&x).trace().abs() < 1e-15);
        }

        #[test]
        fn killing_matches_hand_derived_form(chi in 0.0..3.0f64, kappa in -3.0..3.0f64) {
            let k = killing_form(p(chi, kappa));
            prop_assert!((k - k.transpose()).amax() == 0.0);
            prop_assert!((k - killing_closed_form(chi, kappa)).amax() < 1e-12);
        }

        #[test]
        fn bracket_is_bilinear_antisymmetric(
            chi in 0.0..3.0f64, kappa in -3.0..3.0f64,
            a in prop::array::uniform3(-2.0..2.0f64),
            b in prop::array::uniform3(-2.0..2.0f64),
            h in prop::array::uniform3(-2.0..2.0f64),
            s in -3.0..3.0f64,
        ) {
            let pr = p(chi, kappa);
            let (a, b, h) = (Vec3::from(a), Vec3::from(b), VerticalState::from(Vec3::from(h)));
            let ab = lie_poisson_bracket(&a, &b, &h, pr);
            prop_assert!((ab + lie_poisson_bracket(&b, &a, &h, pr)).abs() < 1e-12);
            let scaled = lie_poisson_bracket(&(a * s), &b, &h, pr);
            prop_assert!((scaled - s * ab).abs() < 1e-11);
        }
    }
}
