//! Stochastic flows on adapted orthonormal frame bundles over foliated
//! Riemannian manifolds.
//!
//! The crate provides two built-in foliated manifolds (a warped torus and a
//! hyperbolic torus bundle), their bundle-like metrics with exact
//! derivatives, adapted frames, the direct-sum connection and its canonical
//! horizontal flows, dyadic Brownian driving paths, Monte-Carlo transition
//! semigroups, and the invariant-density / leafwise-dilation pipeline.
//!
//! All geometric objects live in at most three dimensions. Vectors and
//! matrices are stored as [`Vec3`] / [`Mat3`]; on a two-dimensional manifold
//! the unused trailing slot holds zero in vectors and the identity in metrics
//! and frames.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod atlas;
pub mod brownian;
pub mod error;
pub mod fields;
pub mod flow;
pub mod fourier;
pub mod frame;
pub mod invariant;
pub mod metric;
pub mod semigroup;
pub mod stats;
pub mod suite;

pub use atlas::{Atlas, AtlasKind, ChartPoint, DeckMap, FoliationDims};
pub use brownian::{sample_brownian, DrivingPath};
pub use error::{Error, Result};
pub use fields::{BasicOneForm, ScalarField};
pub use flow::{FlowTrajectory, IntegratorConfig};
pub use fourier::{FourierSeries, WarpProfile};
pub use frame::{AdaptedFrame, DualFrame, GroupElement, OneFormScalarization};
pub use invariant::{DilationSpec, GridDensity};
pub use metric::{ChristoffelField, MetricField, VectorFieldValue};
pub use semigroup::{McConfig, McEstimate, OneFormEstimate, SemigroupMode};

/// Column vector in coordinate components.
pub type Vec3 = nalgebra::Vector3<f64>;
/// Square matrix in coordinate components.
pub type Mat3 = nalgebra::Matrix3<f64>;

/// Largest supported manifold dimension.
pub const MAX_DIM: usize = 3;
