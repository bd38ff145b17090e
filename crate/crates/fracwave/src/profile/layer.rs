//! The explicit layer family: an almost-closed-form one-dimensional front.
//!
//! For `t > 0` the kernel and layer
//!
//! ```text
//! p_t(μ) = (1/π) ∫₀^∞ cos(μr) e^{−t r^{2s}} dr,
//! v_t(μ) = −1 + 2 ∫_{−∞}^{μ} p_t = (2/π) ∫₀^∞ sin(μr)/r · e^{−t r^{2s}} dr
//! ```
//!
//! give a strictly increasing layer `v_t` from −1 to 1 with `v_t′ = 2 p_t > 0`
//! and the algebraic tails
//!
//! ```text
//! lim_{|μ|→∞} |μ|^{1+2s} v_t′(μ) = 4 t s Γ(2s) sin(πs) / π.
//! ```
//!
//! At `s = 1/2` everything is elementary: `p_t(μ) = (1/π) t/(t² + μ²)` and
//! `v_t(μ) = (2/π) arctan(μ/t)`. The family serves as an independent oracle
//! for the profile solver and the operator stack.

use crate::error::{Error, Result};
use crate::util::gauss::gauss_legendre;

/// Frequency cutoff: `e^{−t r^{2s}}` is integrated until the exponent
/// reaches this value (integrand ~ 4e-18).
const EXP_CUTOFF: f64 = 40.0;

fn validate(t: f64, s: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::invalid("t", t, "layer scale must be positive"));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::invalid("s", s, "order must lie in (0, 1)"));
    }
    Ok(())
}

/// Integrates `g` over `[0, r_max]` with panels no wider than `cap`
/// (oscillation control) using 16-point Gauss–Legendre per panel.
fn panel_integrate(g: impl Fn(f64) -> f64, r_max: f64, cap: f64) -> f64 {
    let rule = gauss_legendre(16);
    // Dyadic refinement towards 0: `e^{−t r^{2s}}` has unbounded second
    // derivative at the origin for 2s < 2, which would cap a uniform
    // Gauss panel at low order. On [a, 2a] the derivatives scale like
    // a^{2s−j}, so per-panel error shrinks geometrically towards 0.
    let first = r_max.min(0.25);
    let mut breaks = vec![0.0];
    for j in (1..=24usize).rev() {
        breaks.push(first * (0.5f64).powi(j as i32));
    }
    breaks.push(first);
    breaks.push(r_max.min(1.0));
    breaks.dedup();
    let mut acc = 0.0;
    let mut prev = 0.0;
    for &b in breaks.iter().skip(1) {
        // Even the near-origin panels honour the oscillation cap.
        let m = ((b - prev) / cap).ceil().max(1.0) as usize;
        for j in 0..m {
            let a = prev + (b - prev) * j as f64 / m as f64;
            let c = prev + (b - prev) * (j + 1) as f64 / m as f64;
            acc += rule.integrate(a, c, &g);
        }
        prev = b;
    }
    if r_max > prev {
        let m = ((r_max - prev) / cap).ceil().max(1.0) as usize;
        for j in 0..m {
            let a = prev + (r_max - prev) * j as f64 / m as f64;
            let c = prev + (r_max - prev) * (j + 1) as f64 / m as f64;
            acc += rule.integrate(a, c, &g);
        }
    }
    acc
}

/// The layer kernel `p_t(μ)`.
pub fn layer_kernel(mu: f64, t: f64, s: f64) -> Result<f64> {
    validate(t, s)?;
    let r_max = (EXP_CUTOFF / t).powf(1.0 / (2.0 * s));
    // Panels at most a third of the cosine period.
    let cap = if mu.abs() > 1e-12 {
        (std::f64::consts::PI / mu.abs()).min(r_max)
    } else {
        r_max / 8.0
    };
    let val = panel_integrate(
        |r| (mu * r).cos() * (-t * r.powf(2.0 * s)).exp(),
        r_max,
        cap / 3.0,
    );
    Ok(val / std::f64::consts::PI)
}

/// The layer `v_t(μ)`, strictly increasing from −1 to 1.
pub fn layer(mu: f64, t: f64, s: f64) -> Result<f64> {
    validate(t, s)?;
    if mu == 0.0 {
        return Ok(0.0);
    }
    let r_max = (EXP_CUTOFF / t).powf(1.0 / (2.0 * s));
    let cap = (std::f64::consts::PI / mu.abs()).min(r_max);
    let val = panel_integrate(
        |r| {
            // sin(μr)/r is analytic at r = 0 (→ μ).
            let c = if r.abs() < 1e-14 { mu } else { (mu * r).sin() / r };
            c * (-t * r.powf(2.0 * s)).exp()
        },
        r_max,
        cap / 3.0,
    );
    Ok(2.0 * val / std::f64::consts::PI)
}

/// Derivative of the layer: `v_t′ = 2 p_t`.
pub fn layer_deriv(mu: f64, t: f64, s: f64) -> Result<f64> {
    Ok(2.0 * layer_kernel(mu, t, s)?)
}

/// The limit `lim |μ|^{1+2s} v_t′(μ) = 4 t s Γ(2s) sin(πs) / π`.
pub fn layer_tail_constant(t: f64, s: f64) -> Result<f64> {
    validate(t, s)?;
    let g = statrs::function::gamma::gamma(2.0 * s);
    Ok(4.0 * t * s * g * (std::f64::consts::PI * s).sin() / std::f64::consts::PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_order_closed_forms() {
        // p_t(μ) = (1/π) t/(t² + μ²), v_t(μ) = (2/π) arctan(μ/t).
        for &(t, mu) in &[(1.0, 0.0), (1.0, 2.0), (0.5, 3.0), (2.0, -1.0), (1.0, 25.0)] {
            let p = layer_kernel(mu, t, 0.5).unwrap();
            let p_exact = t / (t * t + mu * mu) / std::f64::consts::PI;
            assert!((p - p_exact).abs() < 1e-8, "p({mu};{t}): {p} vs {p_exact}");
            let v = layer(mu, t, 0.5).unwrap();
            let v_exact = 2.0 * (mu / t).atan() / std::f64::consts::PI;
            assert!((v - v_exact).abs() < 1e-8, "v({mu};{t}): {v} vs {v_exact}");
        }
    }

    #[test]
    fn matches_frozen_reference_values() {
        // 30-digit quadrature references at s = 3/4, t = 1.
        let p0 = layer_kernel(0.0, 1.0, 0.75).unwrap();
        assert!((p0 - 0.28735275145216445).abs() < 1e-10, "p0 = {p0}");
        let p2 = layer_kernel(2.0, 1.0, 0.75).unwrap();
        assert!((p2 - 0.08453962312613752).abs() < 1e-10, "p2 = {p2}");
        let v2 = layer(2.0, 1.0, 0.75).unwrap();
        assert!((v2 - 0.78992034069034166).abs() < 1e-10, "v2 = {v2}");
    }

    #[test]
    fn layer_vanishes_at_zero_for_all_orders() {
        for &s in &[0.5, 0.55, 0.6, 0.75, 0.9] {
            assert_eq!(layer(0.0, 1.0, s).unwrap(), 0.0);
            // Half the kernel mass sits below 0: v(ε) ≈ 2 p(0) ε.
            let eps = 1e-6;
            let v = layer(eps, 1.0, s).unwrap();
            let p = layer_kernel(0.0, 1.0, s).unwrap();
            assert!((v - 2.0 * p * eps).abs() < 1e-10);
        }
    }

    #[test]
    fn layer_increases_to_unit_limits() {
        for &s in &[0.6, 0.75] {
            let mut prev = -1.0;
            for i in 0..=40 {
                let mu = -60.0 + 3.0 * i as f64;
                let v = layer(mu, 1.0, s).unwrap();
                assert!(v > prev, "not increasing at mu={mu}");
                assert!(v > -1.0 && v < 1.0);
                prev = v;
            }
            let far = layer(2000.0, 1.0, s).unwrap();
            assert!((far - 1.0).abs() < 2e-3, "far = {far}");
        }
    }

    #[test]
    fn tail_constant_matches_frozen_values_and_quadrature() {
        // 4·t·s·Γ(2s)·sin(πs)/π.
        let checks = [
            (0.5, 1.0, 0.63661977236758134),
            (0.75, 1.0, 0.59841342060214902),
            (0.75, 0.5, 0.29920671030107451),
            (0.6, 1.0, 0.66709885982449623),
        ];
        for &(s, t, want) in &checks {
            let c = layer_tail_constant(t, s).unwrap();
            assert!((c - want).abs() < 1e-12, "s={s}, t={t}: {c} vs {want}");
        }
        // Large-μ quadrature approaches the limit within 2%.
        for &(s, t, want) in &checks {
            let mu = 100.0f64;
            let got = mu.powf(1.0 + 2.0 * s) * layer_deriv(mu, t, s).unwrap();
            assert!(
                (got - want).abs() < 0.02 * want,
                "s={s}, t={t}: μ^(1+2s) v' = {got} vs limit {want}"
            );
        }
        // s = 1/2 sanity: μ²·(2/π)/(1+μ²) → 2/π.
        let mu = 100.0f64;
        let exact = mu * mu * (2.0 / std::f64::consts::PI) / (1.0 + mu * mu);
        assert!((exact - 2.0 / std::f64::consts::PI).abs() < 0.02 * 2.0 / std::f64::consts::PI);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(layer_kernel(0.0, 0.0, 0.75).is_err());
        assert!(layer_kernel(0.0, -1.0, 0.75).is_err());
        assert!(layer(1.0, 1.0, 0.0).is_err());
        assert!(layer(1.0, 1.0, 1.0).is_err());
    }
}
