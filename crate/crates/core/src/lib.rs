//! Numerical verification of curvature identities along Riemannian
//! submersions.
//!
//! The crate evaluates metrics given as coordinate expressions over nested
//! dual numbers, so Christoffel symbols, curvature and the O'Neill tensors
//! are exact to roundoff. On top of that it assembles both sides of the
//! classical submersion curvature identities and of their analogues for the
//! projective, concircular, conharmonic, conformal and M-projective
//! curvature tensors, and reports residuals.

pub mod dual;
pub mod error;
pub mod expr;
pub mod gallery;
pub mod identities;
pub mod linalg;
pub mod manifold;
pub mod parse;
pub mod rng;
pub mod submersion;
pub mod tensors;

pub use error::{Error, Result};
pub use manifold::{ChartedManifold, CurvatureData, Interval, Point, TangentVector, VectorClass};
pub use parse::{parse_metric_expression, parse_submersion, render_metric, render_submersion};
pub use submersion::{LocalGeometry, Norms, SubmersionSpec};
