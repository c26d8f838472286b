//! Desk-scale constructions and numerical checks for stoquastic Hamiltonian paths:
//! gadget reductions to hypercube and transverse-field form, clock-register
//! linearization, continuous double-well embeddings, and adiabatic dynamics.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x >= y)` also rejects NaN.

pub mod clock;
pub mod continuous;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod operator;
pub mod oracle;
pub mod path;
pub mod reductions;
pub mod spectral;

pub use error::{Error, Result};
