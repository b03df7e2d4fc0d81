//! Optimal asymmetric 1→2 qubit cloning machines for arbitrary input ensembles.

pub mod bloch;
pub mod channel;
pub mod cloner;
pub mod design;
pub mod ensembles;
pub mod error;
pub mod fidelity;
pub mod optimize;
pub mod quadrature;
pub mod verify;

pub use error::{Error, Result};
