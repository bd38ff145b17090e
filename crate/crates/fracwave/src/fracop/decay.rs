//! Decay envelope for the fractional Laplacian of a bounded function.
//!
//! For a bounded `u` that is twice differentiable on a neighbourhood of `x`,
//! the operator value at `x` is controlled by three pieces of measured data:
//!
//! * the Hessian on the inner ball `B_r(x)` (the Taylor remainder kills the
//!   kernel singularity there),
//! * the gradient on the annulus `B_R(x) \ B_r(x)` (first-order differences
//!   suffice at moderate distance),
//! * the global sup of `u` (all that survives in the far field).
//!
//! Splitting the defining integral over those three regions and integrating
//! the kernel radially gives the envelope
//!
//! ```text
//! |(-Δ)^s u(x)| ≤ C_{n,s} ω_{n-1} [ r^{2-2s}/(4(1-s)) · ‖u‖_{C²*(B_r)}
//!                + (r^{1-2s} - R^{1-2s})/(2s-1) · ‖u‖_{C¹*(B_R\B_r)}
//!                + 1/(s R^{2s}) · ‖u‖_∞ ],
//! ```
//!
//! where `ω_{n-1} = |S^{n-1}|` is the surface measure of the unit sphere and
//! the starred seminorms are *sums over components* of sups:
//! `‖u‖_{C¹*} = Σ_j sup |∂_j u|` and `‖u‖_{C²*} = Σ_{i,j} sup |∂_i ∂_j u|`.
//! (With these conventions `|ξᵀ D²u ξ| ≤ ‖u‖_{C²*} |ξ|²` and
//! `|∇u · ξ| ≤ ‖u‖_{C¹*} |ξ|`, so the envelope genuinely dominates.)
//!
//! The middle coefficient is `∫_r^R ρ^{-2s} dρ` in closed form; it degenerates
//! at `s = 1/2` (the antiderivative changes branch to a logarithm), so that
//! order is rejected exactly. Taking `R = r` collapses the annulus and leaves
//! the two-term ball/far-field envelope.

use super::constants::norm_constant;
use super::pointwise::PointwiseConfig;
use crate::error::{Error, Result};

/// Seminorm data measured around the evaluation point.
///
/// All three entries must be finite and non-negative. The two local entries
/// use the component-sum convention described in the module docs.
#[derive(Debug, Clone, Copy)]
pub struct DecayNorms {
    /// `Σ_{i,j} sup_{B_r(x)} |∂²u/∂x_i∂x_j|` on the inner ball.
    pub hess_ball: f64,
    /// `Σ_j sup_{B_R(x)\B_r(x)} |∂u/∂x_j|` on the annulus.
    pub grad_annulus: f64,
    /// `sup_{ℝⁿ} |u|`.
    pub sup_global: f64,
}

/// Surface measure of the unit sphere `S^{n-1}` for `n = 1, 2, 3`.
fn sphere_measure(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        _ => 4.0 * std::f64::consts::PI,
    }
}

/// Evaluates the three-term decay envelope at radii `(cfg.r_inner, cfg.r_outer)`.
///
/// Returns an upper bound for `|(-Δ)^s u(x)|` valid whenever the supplied
/// seminorms dominate the true ones. Rejects `s = 1/2` exactly (the middle
/// coefficient's closed form divides by `2s - 1`); every other `s ∈ (0, 1)`
/// is accepted. `cfg.r_outer == cfg.r_inner` is allowed here and produces the
/// two-term ball/far-field envelope.
pub fn decay_bound(norms: &DecayNorms, cfg: &PointwiseConfig) -> Result<f64> {
    let s = cfg.s;
    let n = cfg.n;
    let r = cfg.r_inner;
    let big_r = cfg.r_outer;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::invalid("s", s, "order must lie in (0, 1)"));
    }
    if s == 0.5 {
        return Err(Error::invalid(
            "s",
            s,
            "order 1/2 is rejected: the annulus coefficient divides by 2s - 1",
        ));
    }
    if !(1..=3).contains(&n) {
        return Err(Error::invalid("n", n as f64, "dimension must be 1, 2, or 3"));
    }
    if !(r > 0.0) {
        return Err(Error::invalid("inner_radius", r, "must be positive"));
    }
    if !(big_r >= r) {
        return Err(Error::invalid(
            "outer_radius",
            big_r,
            "must be at least the inner radius",
        ));
    }
    for (name, v) in [
        ("hess_ball", norms.hess_ball),
        ("grad_annulus", norms.grad_annulus),
        ("sup_global", norms.sup_global),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::invalid(name, v, "seminorm must be finite and non-negative"));
        }
    }

    let ball = r.powf(2.0 - 2.0 * s) / (4.0 * (1.0 - s)) * norms.hess_ball;
    // ∫_r^R ρ^{-2s} dρ, positive for either sign of 2s - 1; exactly 0 at R = r.
    let annulus = if big_r > r {
        (r.powf(1.0 - 2.0 * s) - big_r.powf(1.0 - 2.0 * s)) / (2.0 * s - 1.0)
            * norms.grad_annulus
    } else {
        0.0
    };
    let far = 1.0 / (s * big_r.powf(2.0 * s)) * norms.sup_global;
    Ok(norm_constant(n, s) * sphere_measure(n) * (ball + annulus + far))
}
