//! The isotropic (Higgs) oscillator on the upper hemisphere of the
//! two-sphere: its three separable eigenbases, the energy spectrum, and the
//! interbasis expansion coefficients, each closed form paired with a
//! quadrature or finite-difference check.

pub mod basis;
pub mod error;
pub mod geometry;
pub mod interbasis;
pub mod operators;
pub mod quadrature;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
