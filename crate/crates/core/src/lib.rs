//! Symplectic linear algebra, Lagrangian polar duality and the geometry of
//! Gaussian quantum states.
//!
//! The crate is organised bottom-up:
//!
//! * [`symplectic`]: the symplectic form, membership tests, inverses,
//!   symplectic rotations, basis completion and affine maps.
//! * [`lagrangian`]: Lagrangian planes and frames, and the constructive
//!   transitivity results (rotations between planes, maps between frames).
//! * [`convex`]: ellipsoids, polytopes and products of bodies, with support
//!   functions, membership, volume, centroid and linear images.
//! * [`polar`]: ordinary and Lagrangian polar duality, Blaschke–Santaló
//!   products and Santaló points.
//! * [`extremal`]: John and Löwner ellipsoids.
//! * [`quantum`]: Lagrangian quantum states, quantum blobs, Gaussian
//!   wavepackets and their Wigner transforms.
//!
//! Every numerical tolerance is an explicit parameter or a documented public
//! constant.

pub mod convex;
pub mod error;
pub mod extremal;
pub mod lagrangian;
pub mod linalg;
pub mod optimize;
pub mod polar;
pub mod quantum;
pub mod symplectic;

pub use error::{Error, Result};

/// Default tolerance for symplectic membership tests, `‖SᵀJS − J‖_max`.
pub const TOL_SYM: f64 = 1e-10;
