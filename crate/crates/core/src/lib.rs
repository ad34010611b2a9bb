//! Galerkin spline discretizations of Boussinesq-type systems on [0, 1].

pub mod assembly;
pub mod banded;
pub mod cases;
pub mod convergence;
pub mod error;
pub mod harness;
pub mod integrators;
pub mod mesh;
pub mod oracles;
pub mod quadrature;
pub mod reference;
pub mod spline;
pub mod systems;

pub use error::{Error, Result};
