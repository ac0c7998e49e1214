//! Boundary integral simulation of the sharp-interface limit of the
//! Ohta-Kawasaki model for symmetric diblock copolymers.

pub mod bie;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod linear;
pub mod potentials;
pub mod quadrature;
pub mod scenario;
pub mod spectral;

pub use error::{Error, Result};
