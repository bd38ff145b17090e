//! Diagnostics on a solved front: tail decay rates and derivative bounds.

use super::solution::ProfileSolution;
use crate::error::{Error, Result};
use crate::util::fitting::fit_power_law;

/// Least-squares decay rates of the front and its derivatives over the
/// outer decade of the solved window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayReport {
    /// Fitted exponent of `1 − |Φ|` (two-sided pool); the front approaches
    /// its limits at `|μ|^{−2s}`.
    pub value_exponent: f64,
    /// Fitted amplitude of `1 − |Φ|`.
    pub value_constant: f64,
    /// Fitted exponent of `|Φ′|`; rate `−1−2s`.
    pub slope_exponent: f64,
    /// Fitted amplitude of `|Φ′|`.
    pub slope_constant: f64,
    /// Fitted exponent of `|Φ″|`; rate at most `−1−2s` (upper bound only —
    /// the curvature may decay faster).
    pub curvature_exponent: f64,
    /// Fitted amplitude of `|Φ″|`.
    pub curvature_constant: f64,
    /// Worst coefficient of determination among the three fits.
    pub min_r2: f64,
}

/// Fits the three tail rates on the outer decade `|μ| ∈ [M/20, M/2]`
/// (stopping at `M/2` keeps the window clear of the boundary cells, whose
/// derivative stencils lean on the fitted tail model).
///
/// Errors when any fit explains the data poorly (`R² < 0.99`): the tail is
/// then not resolved and the exponents are meaningless.
pub fn decay_report(p: &ProfileSolution) -> Result<DecayReport> {
    let m = p.m;
    let lo = m / 20.0;
    let hi = m / 2.0;
    let mu = p.mu();
    let mut xs = Vec::new();
    let mut value = Vec::new();
    let mut slope = Vec::new();
    let mut curvature = Vec::new();
    for (i, &x) in mu.iter().enumerate() {
        let r = x.abs();
        if r < lo || r > hi {
            continue;
        }
        let (v, d1, d2) = p.node(i);
        xs.push(r);
        value.push(1.0 - v.abs());
        slope.push(d1.abs());
        curvature.push(d2.abs());
    }
    if xs.len() < 16 {
        return Err(Error::pre(
            "outer decade holds too few nodes; solve with a wider window",
        ));
    }
    let (pe, pc, pr) = fit_power_law(&xs, &value, 0.0);
    let (se, sc, sr) = fit_power_law(&xs, &slope, 0.0);
    let (ce, cc, cr) = fit_power_law(&xs, &curvature, 0.0);
    let min_r2 = pr.min(sr).min(cr);
    if !(min_r2 > 0.99) {
        return Err(Error::VerificationFailed(format!(
            "tail not resolved: worst power-law fit has R² = {min_r2:.4}"
        )));
    }
    Ok(DecayReport {
        value_exponent: pe,
        value_constant: pc,
        slope_exponent: se,
        slope_constant: sc,
        curvature_exponent: ce,
        curvature_constant: cc,
        min_r2,
    })
}

/// Weighted derivative bounds of a solved front and their scaling under
/// dilation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileBounds {
    /// `sup |Φ′|`.
    pub sup_d1: f64,
    /// `sup |μ Φ′|`.
    pub sup_mu_d1: f64,
    /// `sup |Φ″|`.
    pub sup_d2: f64,
    /// `sup |μ Φ″|`.
    pub sup_mu_d2: f64,
    /// `sup |μ² Φ″|`.
    pub sup_mu2_d2: f64,
    /// The single constant dominating every weighted seminorm with as many
    /// μ-powers as derivatives (`sup|μΦ′|` and `sup|μ²Φ″|`): these survive
    /// the dilation `μ ↦ μ/α` unchanged, so one constant serves all α.
    pub c_phi: f64,
}

impl ProfileBounds {
    /// Bounds for the dilated front `Φ_α(μ) = Φ(μ/α)`, exact by the chain
    /// rule — no re-solve involved.
    pub fn dilated(&self, alpha: f64) -> ProfileBounds {
        ProfileBounds {
            sup_d1: self.sup_d1 / alpha,
            sup_mu_d1: self.sup_mu_d1,
            sup_d2: self.sup_d2 / (alpha * alpha),
            sup_mu_d2: self.sup_mu_d2 / alpha,
            sup_mu2_d2: self.sup_mu2_d2,
            c_phi: self.c_phi,
        }
    }
}

/// Grid suprema of `|μ^i Φ^{(j)}|` for `0 ≤ i ≤ j`, `1 ≤ j ≤ 2`.
///
/// The weighted sups are honest on a finite window because every weighted
/// quantity decays (`μΦ′ ~ μ^{−2s}`, `μ²Φ″ ~ μ^{−2s}`): the suprema sit at
/// interior points, not at the truncation edge.
pub fn profile_bounds(p: &ProfileSolution) -> ProfileBounds {
    let mu = p.mu();
    let mut sup_d1 = 0.0f64;
    let mut sup_mu_d1 = 0.0f64;
    let mut sup_d2 = 0.0f64;
    let mut sup_mu_d2 = 0.0f64;
    let mut sup_mu2_d2 = 0.0f64;
    for (i, &x) in mu.iter().enumerate() {
        let (_, d1, d2) = p.node(i);
        sup_d1 = sup_d1.max(d1.abs());
        sup_mu_d1 = sup_mu_d1.max((x * d1).abs());
        sup_d2 = sup_d2.max(d2.abs());
        sup_mu_d2 = sup_mu_d2.max((x * d2).abs());
        sup_mu2_d2 = sup_mu2_d2.max((x * x * d2).abs());
    }
    ProfileBounds {
        sup_d1,
        sup_mu_d1,
        sup_d2,
        sup_mu_d2,
        sup_mu2_d2,
        c_phi: sup_mu_d1.max(sup_mu2_d2).max(sup_d1).max(sup_d2),
    }
}

/// Steepness floor of the transition region: `min{−Φ′(μ)}` over the μ-range
/// where `|Φ(μ)| ≤ 1 − δ`. Downstream constructions need the front to be
/// uniformly steep across its core.
pub fn transition_slope_floor(p: &ProfileSolution, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta", delta, "need 0 < δ < 1"));
    }
    let mu = p.mu();
    let mut floor = f64::INFINITY;
    for (i, _) in mu.iter().enumerate() {
        let (v, d1, _) = p.node(i);
        if v.abs() <= 1.0 - delta {
            floor = floor.min(-d1);
        }
    }
    if !floor.is_finite() {
        return Err(Error::pre(
            "no nodes fall in the transition band; δ too large for the grid",
        ));
    }
    Ok(floor)
}
