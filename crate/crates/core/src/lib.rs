//! Curvature nullity analysis for Lie groups with left-invariant metrics.
//!
//! The input is a metric Lie algebra: structure constants plus an inner
//! product at the base point of a simply transitive presentation. From that
//! single table the crate computes the Levi-Civita connection on Killing
//! fields, the curvature tensor, the nullity distribution and its osculating
//! tower, transvections and the index of symmetry, the holonomy algebra
//! generated by the Nomizu operators, and certified verdicts for the built-in
//! solvable example family.

pub mod algebra;
pub mod analysis;
pub mod connection;
pub mod corpus;
pub mod curvature;
pub mod error;
pub mod examples;
pub mod holonomy;
pub mod linalg;
pub mod nullity;
pub mod subspace;
pub mod symmetry;

pub use algebra::{MetricLieAlgebra, StructureReport, Tolerances, ValidationReport};
pub use connection::ConnectionTable;
pub use curvature::CurvatureTensor;
pub use error::{Error, Result};
pub use subspace::Subspace;
