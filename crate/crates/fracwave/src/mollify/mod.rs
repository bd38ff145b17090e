//! Smoothing of the pyramidal front and the mollified surface machinery.
//!
//! This module owns everything between the sharp polyhedral distance
//! function and the smooth surface the traveling-wave construction rides on:
//!
//! * [`kernel`] — the radially symmetric smoothing kernel: unit mass, flat
//!   plateau at the origin, C-infinity monotone descent, exact algebraic
//!   tail `ρ̃₀ r^{-2s-2}`;
//! * [`ramp`] — the mollified half-ramp profile `P(x) = (ρ * (·)₋)(x)` and
//!   its first three derivatives, closed-form beyond the tail radius and
//!   tabulated inside it;
//! * [`surface`] — the mollified support surface `φ = ρ * h`, its jets up to
//!   third order, and the speed excess `S = c/√(1+|∇φ|²) − k`, evaluated
//!   either by an exact facet-pair decomposition (even, antipodally
//!   symmetric normal fans) or by adaptive polar quadrature (any fan);
//! * [`audit`] — power-law decay audits along mid-facet rays, fitting the
//!   surface band, gradient defect, curvature, and speed excess exponents.

mod kernel;
mod ramp;
mod surface;

pub use kernel::{build_mollifier, build_mollifier_with, MollifierSpec};
pub use ramp::{build_ramp, RampProfile};
pub use surface::{
    mollify_pyramid, MollifiedSurface, QuadratureEval, SpeedJet, SurfaceJet, SurfaceNumerics,
};
