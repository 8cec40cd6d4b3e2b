//! Carré du champ, generators, the boundary equation and the h-transform.
//!
//! Identities that involve `log P` or `h = prod P^{-alpha}` are always
//! checked after clearing denominators, so every residual is an exact
//! polynomial.

mod matrix;
mod model;
mod ops;

pub use matrix::{operator_matrix, OperatorMatrix};
pub use model::{BoundaryDoc, BoundaryFactor, DiffusionModel, Domain, DomainDoc, ModelDoc};
pub use ops::{
    check_boundary_eq, density_check, divergence_drift, drift_from_measure, eigenvalue_of,
    eigenvector_shift_check, gamma_apply, ground_state_residual, h_transform, image_check, l_apply,
    product_rule_check, verify_ground_state, with_exponents, BoundaryData, HTransformResult,
    ImageReport,
};
