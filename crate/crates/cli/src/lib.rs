//! Documents, figures, the invariant runner and the `lagpolar` command line.

pub mod commands;
pub mod document;
pub mod error;
pub mod figure;
pub mod verify;
