//! Numerical laboratory for pyramidal traveling waves of the fractional
//! Allen–Cahn equation
//!
//! ```text
//!     (-Δ)^s u - c ∂_z u - f(u) = 0   in ℝ³,      1/2 < s < 1,
//! ```
//!
//! where `f` is a balanced or unbalanced bistable nonlinearity and `c` exceeds
//! the one-dimensional front speed `k`. The library builds the classical
//! comparison pair for this problem — a pyramidal sub-solution assembled from
//! planar fronts and a mollified super-solution riding above it — verifies both
//! numerically, and then runs a monotone iteration squeezed between them to
//! produce (and validate) the genuinely three-dimensional traveling wave.
//!
//! The crate is organized as a pipeline:
//!
//! * [`fracop`] — fractional Laplacian engines: pointwise principal-value
//!   quadrature in 1/2/3 dimensions with controlled tails, periodic spectral
//!   transforms, a translation-invariant grid discretization with exterior
//!   policies, and the classical interior decay bound.
//! * [`profile`] — the one-dimensional traveling front `Φ` (existence is used
//!   as an input; the solver recomputes the pair `(k, Φ)` numerically),
//!   algebraic-decay diagnostics, an explicit heat-kernel layer family used as
//!   an oracle, and a text interchange format.
//! * [`pyramid`] — the polyhedral skeleton: facet slopes, the support function
//!   `h`, distances to the edge set, and the receding edge neighborhoods.
//! * [`mollify`] — the smoothed pyramid: an algebraically-tailed radial
//!   mollifier, the one-dimensional tail kernel `P` and its derivatives, the
//!   mollified surface `φ = ρ * h` with exact and fast evaluation paths, and
//!   the speed defect `S = c/√(1+|∇φ|²) − k`.
//! * [`wavelab`] — the comparison machinery: sub- and super-solution
//!   evaluation, the slow-variable remainder study, rigorous parameter
//!   selection `(ε, α)`, pointwise verification of both comparison
//!   inequalities, the monotone iteration toward the true wave, and the
//!   edge-distance convergence table.
//! * [`harness`] — reproducible orchestration: key=value configuration with
//!   content hashing, cached pipeline stages, binary field snapshots, CSV/JSON
//!   reporting, and the command-line interface.
//!
//! Everything is deterministic: random sampling is seeded, parallel reductions
//! are order-preserving, and all emitted artifacts are byte-stable across
//! reruns with the same configuration.

#![allow(clippy::too_many_arguments)]
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod field;
pub mod fracop;
pub mod harness;
pub mod mollify;
pub mod profile;
pub mod pyramid;
pub mod util;
pub mod wavelab;

pub use error::{Error, Result};
