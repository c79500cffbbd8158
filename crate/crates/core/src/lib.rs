//! Numerical geometry of the space of almost complex structures on a
//! discretized even-dimensional manifold.
//!
//! The crate is organized bottom-up:
//!
//! - [`fiber`]: dense kernels on one tangent fiber (guarded inverse, matrix
//!   exponential, `tanh(tA/2)`, metric adjoints).
//! - [`charts`]: exponential and Cayley parameterizations around a base
//!   structure, chart transitions, pushforward and pullback of tangents.
//! - [`structures`]: sample spaces and fields (structures, tangents,
//!   symplectic forms, metrics) plus the associated/orthogonal validators.
//! - [`geometry`]: metric, complex structure, fundamental form, connection,
//!   curvature and geodesics, in ambient and chart form.
//! - [`verify`]: finite-difference oracles and checkers that certify the
//!   geometric identities, producing [`verify::CheckReport`]s.
//! - [`format`]: the JSON field document and report serialization.
//! - [`cli`]: the `acs` command-line frontend.

pub mod charts;
pub mod cli;
pub mod error;
pub mod fiber;
pub mod format;
pub mod geometry;
pub mod sampling;
pub mod structures;
pub mod verify;

pub use error::{GeometryError, Result};
pub use fiber::{FiberMatrix, FiberMetric};
pub use geometry::ChartField;
pub use structures::{AcsField, MetricField, SampleSpace, SymplecticField, TangentField};
