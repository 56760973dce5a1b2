//! Maximally entangled states and the generalized fully entangled fraction
//! on `d'⊗d` systems with `d' = K·d + r`.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`] holds the dense complex primitives (tensor products, partial
//!   traces, Schmidt decomposition, Haar sampling, unitary retraction).
//! * [`states`] builds the canonical block states `|χ_m⟩`, canonical mixtures,
//!   and the structural maximal-entanglement checker.
//! * [`fef`] computes the fully entangled fraction by gradient ascent over the
//!   unitary group of the first subsystem.
//! * [`teleport`] evaluates the teleportation fidelity in closed form and by
//!   Monte-Carlo simulation of the protocol.
//! * [`witness`] builds the Hermitian operator bases and the witness `Γ`.
//!
//! Index convention everywhere: the first tensor factor is the `d'`-system,
//! the second the `d`-system, composite index `a·d + b`.

pub mod error;
pub mod exec;
pub mod fef;
pub mod linalg;
pub mod states;
pub mod teleport;
pub mod witness;

pub use error::{Error, Result};
pub use exec::Execution;
pub use fef::{compute_fef, fef_objective, FefConfig, FefResult};
pub use linalg::{BipartiteDims, CMatrix, CVector, DensityMatrix, PureState, UnitaryMatrix, C64};
