//! λ-radial contraction on Riemannian manifolds and the convexity notions
//! built on it: geodesic convexity, p^λ-convexity and total p-convexity.
//!
//! Modules, bottom-up:
//! - [`manifold`]: exp/log/dist/geodesics for Euclidean, spherical,
//!   hyperbolic and chart-metric manifolds.
//! - [`contraction`]: direction functions and the contraction map.
//! - [`convexity`]: regions and sampling-based convexity predicates.
//! - [`experiments`]: bundled scenes, verification suites and reports.
//!
//! Data-parallel loops go through [`par`]; with the `parallel` feature off
//! everything runs sequentially with identical results.

pub mod cli;
pub mod contraction;
pub mod convexity;
pub mod error;
pub mod experiments;
pub mod io;
pub mod manifold;
pub mod par;

pub use contraction::{ContractionMap, DirectionPolicy};
pub use convexity::{ConvexityReport, Region, Sampling, ThresholdReport, Verdict};
pub use error::{Error, Result};
pub use manifold::{GeodesicSegment, Manifold, ManifoldKind, Point, TangentVec, Tolerances};
pub use par::Execution;
