//! Lagrangian quantum states, quantum blobs and Gaussian wavepackets.
//!
//! A state `X_ℓ × X^ℏ_{ℓ′}` determines a quantum blob (its John ellipsoid),
//! and a blob determines a Gaussian wavepacket up to a global phase through
//! the Wigner transform. The metaplectic generators act on wavepackets in
//! closed form.

mod equivalence;
mod gaussian;
mod state;

pub use equivalence::{
    equivalent_states, rotate_state, state_from_map, Equivalence, Verdict, TOL_EQUIVALENCE, WITNESS_TRIES,
};
pub use gaussian::{
    blob_to_gaussian, gaussian_to_blob, metaplectic_apply, wigner, GaussianWavepacket, Metaplectic, QuantumBlob,
    WignerGaussian, TOL_BLOB, TOL_WIDTH_SYMMETRY,
};
pub use state::{
    apply_symplectic, class_to_gaussian, fiducial_state, make_state, standard_form, state_to_blob,
    LagrangianQuantumState, StandardForm, TOL_CENTERED, TOL_ON_PLANE,
};
