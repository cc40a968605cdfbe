//! Numerical construction of the half-wave propagator on closed 2-D
//! Riemannian manifolds as a single oscillatory integral with a
//! complex-valued, geometry-adapted phase function.
//!
//! The pieces, bottom up:
//!
//! * [`geometry`] — charts, metrics, curvature, geodesic primitives;
//! * [`flow`] — the cogeodesic Hamiltonian flow and its momentum derivatives;
//! * [`jets`] — truncated multivariate Taylor arithmetic, the differentiation
//!   engine behind everything that needs high-order mixed derivatives;
//! * [`phase`] — the distinguished phase function, its derivative jets, the
//!   branch-tracked weight and the cut-off;
//! * [`caustics`] — Maslov index and the position/momentum forms;
//! * [`symbolcalc`] — the full-symbol algorithm: wave-operator amplitudes,
//!   amplitude-to-symbol operators, transport-equation quadrature, identity
//!   symbols, small-time law;
//! * [`kernel`] — the propagator kernel as a regulated oscillatory integral
//!   and the exact spectral reference on the sphere;
//! * [`spectral`] — Weyl coefficients, mollified counting function, heat
//!   traces;
//! * [`cli`] — the `wavefront-kit` command-line front end.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod caustics;
pub mod cli;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod jets;
pub mod kernel;
pub mod ode;
pub mod phase;
pub mod quad;
pub mod scalar;
pub mod spectral;
pub mod symbolcalc;

pub use error::{Result, WfError};
pub use geometry::{MetricModel, ModelKind};
