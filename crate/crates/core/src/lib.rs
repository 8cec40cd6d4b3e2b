//! Exact algebra for symmetric diffusion operators with polynomial
//! coefficients, the Doob h-transform of models whose boundary polynomials
//! satisfy a degree-one boundary equation, and Monte Carlo harnesses that
//! compare conditioned diffusions against their matrix-model counterparts.

pub mod error;
pub mod exec;
pub mod experiments;
pub mod diffop;
pub mod discrete;
pub mod models;
pub mod polyring;
pub mod simkit;
pub mod stats;

pub use error::{Error, Result};
