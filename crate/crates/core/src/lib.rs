//! Sub-Riemannian geodesic flows on three-dimensional unimodular Lie groups.
//!
//! Every left-invariant contact sub-Riemannian structure on a 3D unimodular
//! group admits an orthonormal frame `f1, f2` completed by `f0 = [f2, f1]`
//! with
//!
//! ```text
//! [f2, f1] = f0,   [f1, f0] = (chi + kappa) f2,   [f2, f0] = (chi - kappa) f1
//! ```
//!
//! for a pair of invariants `chi >= 0`, `kappa`. This crate integrates the
//! normal Hamiltonian flow of such structures and checks numerically the
//! integrals that make the flow Liouville integrable and superintegrable:
//!
//! * [`algebra`]: structure constants, adjoint matrices, Killing form,
//!   classification and the Lie–Poisson bracket on the momenta.
//! * [`vertical`]: the closed momentum subsystem, its integrals `H`, `E`,
//!   `C_l`, and the reduction to a pendulum.
//! * [`odeflow`]: fixed-step RK4 and adaptive Dormand–Prince 5(4).
//! * [`transport`]: right-invariant Hamiltonians `g0, g1, g2` evaluated via
//!   adjoint transport, the Casimir identity and the frame-coefficient lemma.
//! * [`independence`]: Jacobians, numerical rank, involution and
//!   superintegrability checks.
//! * [`sampling`]: seeded, splittable random sampling of test states.

pub mod algebra;
pub mod checks;
pub mod error;
pub mod independence;
pub mod odeflow;
pub mod sampling;
pub mod transport;
pub mod vertical;

pub use algebra::{AlgebraClass, StructureConstants, UnimodularParams};
pub use error::{Error, Result};
pub use odeflow::{IntegrateError, IntegratorConfig, Method, Trajectory};
pub use transport::{IntegralRecord, TransportState};
pub use vertical::{PendulumRegime, PendulumState, VerticalState};

/// Three-component real vector in the basis `(f0, f1, f2)`.
pub type Vec3 = nalgebra::Vector3<f64>;
/// 3×3 real matrix in the basis `(f0, f1, f2)`.
pub type Mat3 = nalgebra::Matrix3<f64>;
