//! The one-dimensional co-moving front.
//!
//! A balanced bistable reaction admits a unique traveling front for the
//! fractional diffusion of order `s`: a strictly decreasing profile `Φ`
//! connecting `+1` (far left) to `−1` (far right) at a selected speed `k`,
//!
//! ```text
//! (−Δ)^s Φ − k Φ′ − f(Φ) = 0,   Φ(0) = 0,
//! ```
//!
//! with algebraic tails `1 − |Φ| = O(|μ|^{−2s})`. This module carries:
//!
//! - [`nonlinearity`] — the admissible reaction terms and their structural
//!   constants (stability margins, Lipschitz bounds, transition width);
//! - [`layer`] — an explicit family of fronts built from heat-kernel
//!   subordination, exact at `s = 1/2`, used as an oracle;
//! - [`solve`] — the front solver (preconditioned fixed-point iteration
//!   with a secant update of the speed);
//! - [`solution`] — the solved front as a portable table with fitted tail
//!   model, interpolation, and (de)serialization;
//! - [`report`] — tail decay-rate fits and weighted derivative bounds that
//!   the three-dimensional construction consumes.

pub mod layer;
pub mod nonlinearity;
pub mod report;
pub mod solution;
pub mod solve;

pub use layer::{layer, layer_deriv, layer_kernel, layer_tail_constant};
pub use nonlinearity::Nonlinearity;
pub use report::{decay_report, profile_bounds, transition_slope_floor, DecayReport, ProfileBounds};
pub use solution::{ProfileSolution, TailModel};
pub use solve::{solve_profile, solve_profile_relaxed, InitialGuess, SolveNumerics};
