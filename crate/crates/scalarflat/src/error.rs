//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("wedge of a {0}-form with a {1}-form exceeds the manifold dimension")]
    DegreeOverflow(usize, usize),

    #[error("interior product requires a form of degree >= 1")]
    InteriorOfScalar,

    #[error("form degrees {0} and {1} are incompatible for this operation")]
    DegreeMismatch(usize, usize),

    #[error("metric is not positive definite at the evaluation point")]
    MetricNotPositive,

    #[error("metric is near-degenerate (condition number {0:.3e})")]
    MetricIllConditioned(f64),

    #[error("point lies outside the chart domain (coordinate {index}: {value})")]
    OutsideChart { index: usize, value: f64 },

    #[error("finite-difference stencil of half-width {step:.3e} leaves the chart domain")]
    StencilLeavesChart { step: f64 },

    #[error("Killing field is below the singular-locus cutoff (|V| = {0:.3e})")]
    NearSingularLocus(f64),

    #[error("momentum value {z} lies outside the regular range ({lo}, {hi})")]
    OutsideRegularRange { z: f64, lo: f64, hi: f64 },

    #[error("family does not expose a level-set reduction")]
    NoReduction,

    #[error("family does not expose an isothermal transversal chart")]
    NoIsothermalChart,

    #[error("quadrature did not stabilise under order doubling (relative change {0:.3e})")]
    QuadratureUnstable(f64),

    #[error("quadrature order must be >= 2 (got {0})")]
    QuadratureOrder(usize),

    #[error("invalid family parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown family '{0}'")]
    UnknownFamily(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
