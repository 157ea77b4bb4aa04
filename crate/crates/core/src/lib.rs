//! Rabinovich-type dynamical systems: the classical Hamilton-Poisson flow,
//! metriplectic revisions, distributed-delay variants and Caputo-fractional
//! versions, with integrators and equilibrium stability analysis.

// `!(x > 0.0)` style guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod config;
pub mod dynamics;
pub mod delay;
pub mod error;
pub mod fractional;
pub mod io;
pub mod metriplectic;
pub mod plot;
pub mod poisson;
pub mod poly;
pub mod quad;
pub mod stability;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
pub use state::{Mat3, StateVec};
