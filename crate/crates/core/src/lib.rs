//! Geometry of the plane field orthogonal to a vector field ξ on ℝ³.
//!
//! A field is three symbolic components over an axis-aligned box. From it the
//! crate computes the chart coefficients of the normal curvature form, the
//! asymptotic directions, the Lie–Cartan lift to (x, y, z, p), the parabolic
//! set K = 0 with its special curves and point classes, and integral curves
//! in ℝ³ and in the lift.
//!
//! Pointwise geometry is generic over [`scalar::Scalar`]: `f32`, `f64` and
//! the exact [`Rational`]. Curve tracing, meshing and integration run in `f64`.

// Tensor code indexes several arrays with the same loop variables.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod expr;
pub mod field;
pub mod geometry;
pub mod integrate;
pub mod jet;
pub mod liecartan;
pub mod parabolic;
pub mod reproduce;
pub mod scalar;
pub mod vec3;

pub use error::{Error, Result};
pub use field::{Domain, FieldSource, FieldSpec};
pub use scalar::Rational;

pub type JetFrame64 = geometry::JetFrame<f64>;
pub type ChartFrame64 = geometry::ChartFrame<f64>;
pub type ChartFrameF32 = geometry::ChartFrame<f32>;
pub type ChartFrameExact = geometry::ChartFrame<Rational>;
