#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Numerical laboratory for the vanishing dissipation/radiation limit of the
//! Navier-Stokes-Fourier system towards smooth Euler flows.

pub mod boundary_layer;
pub mod error;
pub mod euler_reference;
pub mod harness;
pub mod nsf_solver;
pub mod relative_energy;
pub mod thermodynamics;
pub mod transport;

pub use error::{Error, Result};
