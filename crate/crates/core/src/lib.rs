//! Forward and inverse solver for Caputo sub-diffusion on an annulus with a
//! generalized impedance boundary condition on the inner curve.

pub mod cli;
pub mod error;
pub mod fem;
pub mod freq;
pub mod geometry;
pub mod laplace;
pub mod linalg;
pub mod ntd;
pub mod quadrature;
pub mod time;
pub mod trig;

pub use error::{Error, Result};
