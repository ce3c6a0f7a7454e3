//! Exact finite-dimensional quantum state algebra, one-shot conditional
//! entropies, and a heat-bath/battery thermodynamics simulator.
//!
//! The crate is organized around four layers:
//!
//! - [`quantum`]: dense density-operator algebra on labelled multi-qubit
//!   registers (tensor products, partial traces, purification, distances,
//!   Haar-random unitaries, Gibbs states).
//! - [`entropy`]: von Neumann, min- and max-entropies of a subsystem
//!   conditioned on another, with certified convex solvers and smoothing.
//! - [`thermo`]: level manipulation with work accounting against an ideal
//!   battery and a memoryless heat bath, including quasistatic erasure and
//!   work extraction schedules.
//! - [`decoupling`] and [`protocol`]: random-unitary decoupling of a
//!   subregister from its environment, the partner-subsystem (purifier)
//!   construction, and the full erase/extract pipeline with bound checks.
//!
//! All energies are expressed in units of kT and all work in units of
//! kT·ln 2; conversion to joules happens only at the CLI boundary.
//! Every randomized routine takes an explicit seed and is deterministic.

pub mod decoupling;
pub mod entropy;
pub mod error;
pub mod protocol;
pub mod quantum;
pub mod thermo;

pub use error::CoreError;

/// Dense representations are capped at 10 qubits (1024 × 1024 matrices).
pub const MAX_QUBITS: usize = 10;

/// Maximum global dimension accepted by state constructors.
pub const MAX_DIM: usize = 1 << MAX_QUBITS;
