//! Thin wrappers around special functions plus a few derived constants used
//! throughout the fractional-operator code.

/// Gamma function `Γ(x)`.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Natural log of `|Γ(x)|` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Euler beta function `B(a, b) = Γ(a)Γ(b)/Γ(a+b)` for `a, b > 0`.
pub fn beta(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

/// Surface area of the unit sphere in ℝⁿ: `ω_{n-1} = 2 π^{n/2} / Γ(n/2)`.
pub fn unit_sphere_area(n: usize) -> f64 {
    let nf = n as f64;
    2.0 * std::f64::consts::PI.powf(nf / 2.0) / gamma(nf / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_matches_reference_values() {
        assert!((gamma(0.5) - std::f64::consts::PI.sqrt()).abs() < 1e-15);
        assert!((gamma(1.0) - 1.0).abs() < 1e-15);
        assert!((gamma(4.0) - 6.0).abs() < 1e-13);
        // Γ(1.5) = √π/2
        assert!((gamma(1.5) - 0.8862269254527580).abs() < 5e-15);
    }

    #[test]
    fn beta_matches_reference_values() {
        // B(1/2, 1/2) = π
        assert!((beta(0.5, 0.5) - std::f64::consts::PI).abs() < 1e-13);
        // B(1/2, 1) = 2
        assert!((beta(0.5, 1.0) - 2.0).abs() < 1e-14);
        // B(1/2, 5/4) — reference value computed with 30-digit arithmetic.
        assert!((beta(0.5, 1.25) - 1.7480383695280799).abs() < 1e-13);
    }

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((unit_sphere_area(2) - 2.0 * std::f64::consts::PI).abs() < 1e-13);
        assert!((unit_sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-13);
    }
}
