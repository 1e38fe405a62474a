//! Regularized three-dimensional discrete dislocation dynamics.

#![allow(non_snake_case)]

pub mod cli_io;
pub mod elasticity;
pub mod energy_force;
pub mod evolution;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod mobility;
pub mod quadrature;

pub use error::{DddError, Result};
