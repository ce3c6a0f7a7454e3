//! Dense quantum state algebra on labelled registers.
//!
//! States are stored as full complex matrices (or amplitude vectors for pure
//! states) together with an ordered list of subsystem dimensions. Subsystem 0
//! is the most significant tensor factor, matching row-major Kronecker order.

mod distance;
mod gibbs;
mod layout;
mod ops;
mod random;
mod schmidt;
mod state;

pub use distance::{fidelity, purified_distance, trace_distance};
pub use gibbs::{gibbs_state, gibbs_weights};
pub use layout::RegisterLayout;
pub use ops::{
    apply_unitary, apply_unitary_positions, apply_unitary_vec, marginal_of_vector, partial_trace,
    partial_trace_positions, permute_state, permute_vector, purify, replace_subsystems, tensor,
};
pub use random::{haar_unitary, random_density, random_pure_state};
pub use schmidt::{schmidt_decompose, schmidt_decompose_positions, SchmidtDecomposition};
pub use state::{
    basis_state, hermitian_eigen, matrix_sqrt_psd, DensityOperator, PureState, TOL_EIG, TOL_HERM,
};

pub type C64 = num_complex::Complex64;
pub type CMatrix = nalgebra::DMatrix<C64>;
pub type CVector = nalgebra::DVector<C64>;
