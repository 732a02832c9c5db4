//! Nyström discretization of the Neumann–Poincaré operator on smooth closed
//! surfaces in R³, its spectrum, and the curvature integrals that predict
//! the spectral asymptotics.

pub mod assembly;
pub mod config;
pub mod error;
pub mod functionals;
pub mod geometry;
pub mod linalg;
pub mod numerics;
pub mod pipeline;
pub mod report;
pub mod spectrum;

pub use error::{Error, Result};
