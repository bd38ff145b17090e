//! Normalization constants of the fractional Laplacian.

use crate::util::special::{beta, gamma};

/// Kernel normalization `C_{n,s} = 2^{2s} s Γ(n/2+s) / (Γ(1-s) π^{n/2})`.
///
/// This is the unique constant making the singular integral match the Fourier
/// multiplier `|ξ|^{2s}`; equivalently
/// `C_{n,s} = (∫_{ℝⁿ} (1 - cos ζ₁) |ζ|^{-n-2s} dζ)^{-1}`.
///
/// # Panics
/// Panics unless `n ≥ 1` and `0 < s < 1`.
pub fn norm_constant(n: usize, s: f64) -> f64 {
    assert!(n >= 1, "dimension must be at least 1");
    assert!(s > 0.0 && s < 1.0, "order s must lie in (0,1), got {s}");
    let nf = n as f64;
    4.0_f64.powf(s) * s * gamma(nf / 2.0 + s)
        / (gamma(1.0 - s) * std::f64::consts::PI.powf(nf / 2.0))
}

/// Dimension-reduction ratio
/// `C_{n,s} / C_{n+1,s} = √π Γ(n/2+s) / Γ((n+1)/2+s) = B(1/2, n/2+s) · Γ(·)…`,
/// the exact value of `∫_ℝ (1+t²)^{-(n+1)/2-s} dt`.
///
/// Integrating one coordinate out of the `(n+1)`-dimensional kernel
/// `|ξ|^{-(n+1)-2s}` leaves `(C_{n,s}/C_{n+1,s}) |ξ'|^{-n-2s}`, which is what
/// reduces the operator on functions of fewer variables to a lower-dimensional
/// one. For `n = 1` the ratio equals `B(1/2, 1/2+s)`, in particular exactly
/// `2` at `s = 1/2`.
pub fn constant_ratio(n: usize, s: f64) -> f64 {
    assert!(n >= 1, "dimension must be at least 1");
    assert!(s > 0.0 && s < 1.0, "order s must lie in (0,1), got {s}");
    let nf = n as f64;
    std::f64::consts::PI.sqrt() * gamma(nf / 2.0 + s) / gamma((nf + 1.0) / 2.0 + s)
}

/// `B(1/2, 1/2 + s)`, the `n = 1` dimension-reduction ratio.
pub fn beta_half(s: f64) -> f64 {
    beta(0.5, 0.5 + s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::gauss::gauss_legendre;
    use crate::util::quad::{geometric_breaks, integrate_panels};

    // Reference values computed independently with 30-digit arithmetic.
    const C_1_050: f64 = 0.3183098861837906715; // = 1/π
    const C_1_075: f64 = 0.2992067103010745085;
    const C_2_075: f64 = 0.1711671296905523429;
    const C_3_075: f64 = 0.1190505673767018183;
    const C_3_060: f64 = 0.1167892891792395569;

    #[test]
    fn matches_frozen_reference_values() {
        assert!((norm_constant(1, 0.5) - C_1_050).abs() < 1e-15);
        assert!((norm_constant(1, 0.75) - C_1_075).abs() < 1e-15);
        assert!((norm_constant(2, 0.75) - C_2_075).abs() < 1e-15);
        assert!((norm_constant(3, 0.75) - C_3_075).abs() < 1e-15);
        assert!((norm_constant(3, 0.6) - C_3_060).abs() < 1e-15);
        assert!((norm_constant(1, 0.5) - 1.0 / std::f64::consts::PI).abs() < 1e-15);
    }

    /// The defining 1-D integral `∫_ℝ (1-cos t)/|t|^{1+2s} dt` must equal
    /// `1 / C_{1,s}`. The smooth head is integrated directly; the oscillatory
    /// part is summed over π-length segments with an alternating-tail bound.
    #[test]
    fn inverts_defining_integral_in_1d() {
        for &s in &[0.5, 0.6, 0.75, 0.9] {
            let p = 1.0 + 2.0 * s;
            // Innermost head [0, a]: three Taylor terms of 1 - cos t; the
            // remainder is O(a^{8-2s}).
            let a0: f64 = 1e-3;
            let head_taylor = a0.powf(2.0 - 2.0 * s) / (2.0 * (2.0 - 2.0 * s))
                - a0.powf(4.0 - 2.0 * s) / (24.0 * (4.0 - 2.0 * s))
                + a0.powf(6.0 - 2.0 * s) / (720.0 * (6.0 - 2.0 * s));
            // Head [a, 1]: write 1 - cos t = 2 sin²(t/2) to avoid cancellation.
            let head_breaks = geometric_breaks(a0, 1.0, 20);
            let head = head_taylor
                + integrate_panels(&head_breaks, 12, |t| {
                    2.0 * (0.5 * t).sin().powi(2) * t.powf(-p)
                });
            // Tail [1, ∞): ∫ t^{-p} = 1/(2s) analytically, minus the
            // oscillatory ∫ cos(t) t^{-p} over π-segments up to T.
            let segments = 4000usize;
            let rule = gauss_legendre(8);
            let mut osc = 0.0;
            let mut a = 1.0_f64;
            for k in 0..segments {
                let b = ((k + 1) as f64) * std::f64::consts::PI;
                let b = if b <= a { a } else { b };
                if b > a {
                    osc += rule.integrate(a, b, |t| t.cos() * t.powf(-p));
                    a = b;
                }
            }
            let tail = 1.0 / (2.0 * s) - osc; // remainder ≤ 2 a^{-p} ≈ 1e-10
            let integral = 2.0 * (head + tail);
            let got = 1.0 / integral;
            let want = norm_constant(1, s);
            assert!(
                (got - want).abs() < 1e-8,
                "s={s}: defining integral gives C={got}, formula {want}"
            );
        }
    }

    /// `C_{n,s}/C_{n+1,s}` equals `∫_ℝ (1+t²)^{-(n+1)/2-s} dt` (quadrature
    /// oracle) and in particular 2 at `(n,s) = (1,1/2)`.
    #[test]
    fn constant_ratio_matches_quadrature_and_special_value() {
        assert!((constant_ratio(1, 0.5) - 2.0).abs() < 1e-14);
        assert!((beta_half(0.5) - 2.0).abs() < 1e-14);
        assert!((beta_half(0.75) - 1.7480383695280799).abs() < 1e-13);
        for &(n, s) in &[(1usize, 0.5), (1, 0.75), (2, 0.75), (3, 0.6)] {
            let want = constant_ratio(n, s);
            assert!(
                (want - norm_constant(n, s) / norm_constant(n + 1, s)).abs() < 1e-14,
                "ratio formula inconsistent with constants at n={n}, s={s}"
            );
            let p = (n as f64 + 1.0) / 2.0 + s;
            // Even integrand: 2 ∫_0^∞ (1+t²)^{-p} dt, geometric panels out to
            // where the analytic tail t^{1-2p}/(2p-1) is exact to round-off.
            let big = 1e8;
            let mut got = 2.0 * integrate_panels(
                &geometric_breaks(1e-4, big, 120),
                14,
                |t| (1.0 + t * t).powf(-p),
            );
            got += 2.0 * 1e-4; // [0, 1e-4] where the integrand is 1 - O(1e-8)
            got -= 2.0 * (1e-4_f64.powi(3)) / 3.0 * p; // next Taylor term
            got += 2.0 * big.powf(1.0 - 2.0 * p) / (2.0 * p - 1.0);
            assert!(
                (got - want).abs() < 1e-10,
                "n={n}, s={s}: quadrature {got} vs formula {want}"
            );
        }
    }

    #[test]
    #[should_panic(expected = "order s must lie in (0,1)")]
    fn rejects_out_of_range_order() {
        norm_constant(1, 1.0);
    }
}
