//! Analysis of time-parametrized families of quantum dynamical maps.
//!
//! The crate decides CP-divisibility of a family `{Λ_t}` on a time grid and,
//! for bijective dynamics, constructs pairs of initial states on a
//! system+ancilla space `C^{d+1} ⊗ C^d` whose trace distance grows over any
//! step where the intermediate map `V_{t,s} = Λ_t Λ_s⁻¹` fails to be
//! completely positive.
//!
//! Module map:
//!
//! - [`operator`]: dense complex linear algebra (tensor products, partial
//!   traces, Jacobi eigen/singular value solvers, trace norms).
//! - [`channel`]: superoperator channels, Choi duality and CP/TP predicates.
//! - [`dynamics`]: analytic model families and a fourth-order generator
//!   integrator.
//! - [`divisibility`]: intermediate maps, grid scans, rank profiles.
//! - [`witness`]: backflow witness construction and verification.
//! - [`distinguishability`]: trace-distance trajectories and backflow integrals.
//! - [`scenario`]: JSON scenario files and the batch pipeline behind the CLI.

#![forbid(unsafe_code)]
// `!(x > 0.0)` style guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod distinguishability;
pub mod divisibility;
pub mod dynamics;
mod error;
pub mod operator;
pub mod random;
pub mod scenario;
mod tolerance;
pub mod witness;

pub use error::{Error, Result};
pub use tolerance::Tolerances;

pub use num_complex::Complex64 as C64;
