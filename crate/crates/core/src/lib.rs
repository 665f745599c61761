//! Elastic shape analysis of open curves in the plane, the hyperbolic
//! half-plane and the sphere.
//!
//! Curves are compared with the elastic metric `G^{a,b}`, which is invariant
//! under reparameterization. Geodesics between parameterized curves are
//! computed by [`geodesic`], and [`matching`] turns them into geodesics of
//! the shape space by repeatedly extracting the horizontal part of a path
//! and moving the target curve along its fiber.

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
mod error;
pub mod generate;
pub mod geodesic;
pub mod geometry;
pub mod linalg;
pub mod matching;
pub mod metric;
mod vec3;

pub use curve::{arc_length, reparameterize, velocity, CurvePath, Diffeo, DiscreteCurve, VectorField};
pub use error::{Error, Result};
pub use geodesic::{geodesic, geodesic_bvp, geodesic_plane, GeodesicResult, SolverConfig};
pub use geometry::{covariant_derivative, Coords, Manifold, ManifoldPoint, TangentVector};
pub use matching::{dp_reparam_oracle, horizontal_part, optimal_match, MatchConfig, MatchResult, PathDecomposition};
pub use metric::{decompose, elastic_inner, path_energy, path_length, Decomposition, ElasticParams};
