//! Numerical verification toolkit for a d-input/d-outcome Bell self-test
//! built on Heisenberg-Weyl observables over odd prime dimensions.
//!
//! The library constructs the Bell operator family in its ideal
//! representation, certifies its algebraic identities (sum-of-positive-
//! operators decompositions, coefficient-matrix unitarity, the quadratic
//! folding identity, Tsirelson values), computes classical local-hidden-
//! variable bounds by discrete optimization, and simulates the local
//! extraction isometry with quantitative robustness checks against the
//! closed-form error bound delta(eps).
//!
//! Module map:
//! - [`zmod`]: exact arithmetic in Z_d (inverses, Legendre symbol, the
//!   canonical cubic phase polynomial).
//! - [`hw`]: dense complex matrices and the Heisenberg-Weyl operators,
//!   Fourier matrix, Bell states, characteristic functions.
//! - [`bell`]: the coefficient table g(j,k,n), the operators B_d / S /
//!   B_full, both SOPO witness families, identity checks.
//! - [`strategy`]: bipartite strategies, Bell values, seeded noise,
//!   robustness residuals, the qutrit commutation elements.
//! - [`lhv`]: exact and sampled classical bounds over deterministic
//!   assignments.
//! - [`iso`]: the extraction isometry and the delta(eps) report.
//! - [`eig`]: a dense Hermitian Jacobi eigensolver.
//! - [`runner`] / [`report`]: the verification runs and their
//!   machine-readable reports.

pub mod bell;
pub mod eig;
pub mod hw;
pub mod iso;
pub mod lhv;
pub mod nu;
pub mod report;
pub mod runner;
pub mod strategy;
pub mod zmod;

pub use bell::{build_bell, build_full_bell_from_chi, folding_check, g_coeff, sopo_ops, sopo_residual, BellCoeffs, BellOperatorSet};
pub use hw::{bell_state, char_closed_form, char_function, clock_z, displacement, fourier, magic_unitary, rotated_bell_state, shift_x, ComplexMatrix, PhaseIndex, StateVector};
pub use iso::{build_isometry, extract, theorem_bound, IsometryReport};
pub use lhv::{lhv_bound, lhv_value, Assignment, LhvCertificate, LhvMethod};
pub use nu::{NuSpec, Orientation, QutritPhases};
pub use strategy::{bell_value, ideal_strategy, perturb, qutrit_q_elements, residuals, NoiseKind, NoiseSpec, ResidualReport, Strategy};
pub use zmod::{canonical_nu, FieldElem, Poly, PrimeDim};
