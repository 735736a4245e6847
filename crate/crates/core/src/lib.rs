//! Numerical laboratory for positivity questions of radial Schrodinger
//! operators on rotationally symmetric model manifolds.
//!
//! A model manifold carries the metric `dr^2 + sigma(r)^2 g_{S^{n-1}}`, so
//! every operator in sight reduces to a one-dimensional divergence form
//! weighted by the area density `S(r) = omega_{n-1} sigma(r)^{n-1}`. The
//! crate discretizes that structure so the key identities hold *exactly*
//! at the discrete level rather than up to truncation error:
//!
//! * distributional and weak pairings agree to machine precision
//!   (summation by parts is exact for the half-node flux form);
//! * the ground-state transform `u -> u/alpha` maps subsolution
//!   certificates to subsolution certificates in both directions;
//! * subharmonicity in the Green coordinate `t = int dr/w` is literally
//!   convexity of the nodal values, which drives the monotone smooth
//!   approximation and the Kato-type inequalities.
//!
//! Modules follow the pipeline: [`geometry`] builds grids and measures,
//! [`operators`] the discrete operators and inequality certificates,
//! [`groundstate`] the positive-solution transform, [`smoothing`] the
//! monotone approximation, [`kato`] the positive-part inequality,
//! [`liouville`] the energy estimates and Liouville tests, and
//! [`positivity`] the end-to-end experiments and the sharpness catalog.

// Validation sites use `!(x > 0)` so that NaN fails the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Stencil kernels index several aligned arrays at once.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod geometry;
pub mod groundstate;
pub mod kato;
pub mod liouville;
pub(crate) mod ode;
pub mod operators;
pub mod positivity;
pub mod sampling;
pub mod smoothing;

pub use error::{Error, Result};
pub use geometry::{DomainSpec, LeftKind, ModelManifold, RadialGrid, RightKind, WarpingProfile};
pub use operators::{BoundaryTag, DiscreteOperator, GridFunction, IneqCertificate, Region};
