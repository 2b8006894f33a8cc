//! Equilibrium double bubbles in the plane with radial density `r^p`.
//!
//! The crate measures weighted length and area, integrates curves of
//! constant generalized curvature, builds the four classical equilibrium
//! candidates (standard, symmetric, two tangent circles, concentric),
//! checks their equilibrium conditions, and provides the conformal cone
//! maps, geodesics and the area-preserving radial map used to study them.

// `!(x > 0.0)` rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod candidates;
pub mod cgc;
pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod geometry;
pub mod measure;
pub mod ode;
pub mod quadrature;
pub mod roots;
pub mod svg;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{
    BoundaryCurve, CircularArc, CurveSample, LineSegment, Point, Polyline, Segment,
};
pub use measure::{weighted_area, weighted_length, DensityExponent, WeightedMeasureReport};
