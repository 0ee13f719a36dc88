//! Symbolic-numeric calculus of zeta-regularised trace residues for regular
//! spectral triples.
//!
//! The crate has three layers:
//!
//! 1. **Algebraic core** — jets and Laurent jets ([`jetring`]), the free
//!    coefficient algebra of `δⁿ(a)` and `δⁿ([D,a])` generators ([`ncalg`]),
//!    and the truncated log-polyhomogeneous symbol calculus ([`symbols`]):
//!    power/log commutation, perturbed complex powers `(|D|+P)^{-z}`,
//!    logarithm differences, conjugation families.
//! 2. **Trace layer** ([`zetatrace`]) — meromorphic germs of
//!    `z ↦ Tr(A(z))` assembled from a model's word traces, the residue
//!    functionals `τ_j`, the higher-residue identity for holomorphic
//!    families, weight-perturbation and commutator discrepancies, and the
//!    canonical trace on operators whose order avoids the dimension
//!    spectrum.
//! 3. **Models and verification** — the circle model ([`circle`]) with two
//!    independent continuation routes, plus the check batteries, config and
//!    report plumbing ([`suites`], [`config`], [`report`]) behind the
//!    `szeta` binary.

pub mod circle;
pub mod config;
pub mod jetring;
pub mod ncalg;
pub mod report;
pub mod scalar;
pub mod suites;
pub mod symbols;
pub mod zetatrace;

pub use scalar::{Backend, ExactC, F64C, Scalar};
