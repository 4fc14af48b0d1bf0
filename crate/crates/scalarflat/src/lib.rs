//! Numerical verification engine for scalar-flat Kähler four-manifolds
//! carrying a Killing field that is also symplectomorphic.
//!
//! The library evaluates explicit geometries (a catalog of families),
//! computes their curvature, momentum and level-set reductions, and checks
//! pointwise and integral identities relating them — conformal Gauss-Bonnet
//! style evolution laws along the momentum, Chern-Simons degree densities,
//! transgression forms, and the LeBrun ansatz equations.

pub mod chart;
pub mod curvature;
pub mod error;
pub mod families;
pub mod fields;
pub mod forms;
pub mod identities;
pub mod jet;
pub mod killing;
pub mod linalg;
pub mod quadrature;
pub mod reduction;
pub mod report;

pub use chart::{Chart, ChartId, Point};
pub use error::{Error, Result};
