//! Fractional Laplacian engines.
//!
//! The operator is normalized as
//!
//! ```text
//!   (-Δ)^s u(x) = C_{n,s} PV ∫_{ℝⁿ} (u(x) - u(x+ξ)) / |ξ|^{n+2s} dξ,
//!   C_{n,s} = 2^{2s} s Γ(n/2 + s) / (Γ(1-s) π^{n/2}),
//! ```
//!
//! equivalently the Fourier multiplier `|ξ|^{2s}`. Four complementary
//! realizations are provided:
//!
//! * [`pointwise`] — adaptive principal-value quadrature at a single point in
//!   1, 2, or 3 dimensions, with selectable far-field (tail) policies and an
//!   optional interface hint for layered integrands;
//! * [`spectral`] — exact multiplier on periodic grids via FFT, plus the
//!   shifted resolvent used as a preconditioner;
//! * [`grid`] — translation-invariant quadrature weights on a uniform box
//!   with zero/constant exterior extension, applied by FFT convolution;
//! * [`decay`] — the classical interior bound on `|(-Δ)^s u|` in terms of
//!   local seminorms and the far-field size.

pub mod constants;
pub mod decay;
pub mod grid;
pub mod pointwise;
pub mod spectral;

pub use constants::{constant_ratio, norm_constant};
