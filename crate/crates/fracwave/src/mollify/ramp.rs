//! Mollified half-ramp profile.
//!
//! `P(x) = ∬ ρ(x', y') (x - x')₋ dx' dy'` is the convolution of the
//! negative-part ramp with the smoothing kernel; it is what remains of a
//! facet's contribution to the smoothed surface when the surface is written
//! in that facet's frame. Writing `q(x) = ∫ ρ(x, y) dy` for the kernel's
//! planar marginal, the profile collapses to single radial integrals:
//!
//! * `P''(x) = q(x) = 2 ∫_x^∞ ρ̃(r) r / √(r² - x²) dr`,
//! * `P'''(x) = q'(x) = 2x ∫_x^∞ ρ̃'(r) / √(r² - x²) dr`,
//! * `P'(x) = -∫_x^∞ q`, `P(x) = ∫_x^∞ q(t)(t - x) dt`.
//!
//! Beyond the kernel's tail radius the marginal is the exact power
//! `q(x) = 2s·x^{-2s-1}` (that is what the tail constant was chosen for), so
//! there `P = x^{1-2s}/(2s-1)`, `P' = -x^{-2s}`, `P'' = 2s·x^{-2s-1}`,
//! `P''' = -2s(2s+1)·x^{-2s-2}` in closed form. Inside, `q` and `q'` are
//! computed by quadrature at uniform nodes (the substitution `r = x + u²`
//! removes the square-root singularity), and `P'`, `P` follow by integrating
//! *backwards* from the tail anchor with a derivative-corrected trapezoid
//! rule, so the seam at the tail radius is exact by construction.
//!
//! Key structural facts the constructor verifies: `-P'(0) = 1/2` (half the
//! kernel mass sits on each side of any line through the origin),
//! `P(0) = 2 ∫ r² ρ̃ dr`, `P''(0) = 2 ∫ ρ̃ dr`, the sign pattern
//! `(-1)^i P^{(i)} > 0`, and monotone decay of each order.

use std::io::{self, Write as IoWrite};

use crate::error::{Error, Result};
use crate::mollify::kernel::MollifierSpec;
use crate::util::fmt;
use crate::util::interp::{hermite_cubic, hermite_quintic};
use crate::util::quad;

/// Number of uniform cells between 0 and the tail radius.
const CELLS: usize = 1024;

/// Mollified half-ramp profile with derivatives through third order.
#[derive(Debug, Clone)]
pub struct RampProfile {
    s: f64,
    r_tail: f64,
    /// Node spacing; the tail radius is exactly node `CELLS`.
    h: f64,
    /// Node values of `P`, `P'`, `P''`, `P'''` on `[0, r_tail]`.
    p: [Vec<f64>; 4],
    /// Centered-difference slopes of `P'''`, for third-order interpolation.
    d3: Vec<f64>,
    /// Largest normalized gap between quadrature and the closed tail forms
    /// at the seam node.
    seam_defect: f64,
}

/// Planar marginal `q(x) = 2 ∫_x^∞ ρ̃(r) r / √(r² - x²) dr`.
///
/// The near part (up to `R = max(2x, r_tail)`) uses the substitution
/// `r = x + u²`, which turns the integrand into a smooth function of `u`;
/// the far part is the kernel's exact power tail, summed as a series.
fn marginal(kernel: &MollifierSpec, x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    let r_cut = (2.0 * x).max(kernel.tail_radius());
    let near = integrate_substituted(kernel, x, r_cut, |r| 2.0 * r * kernel.density(r));
    let s = kernel.order();
    let tail = 2.0 * kernel.tail_coef() * inv_sqrt_power_tail(2.0 * s + 2.0, x, r_cut);
    near + tail
}

/// Derivative of the planar marginal,
/// `q'(x) = 2x ∫_x^∞ ρ̃'(r) / √(r² - x²) dr`.
fn marginal_d(kernel: &MollifierSpec, x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    let r_cut = (2.0 * x).max(kernel.tail_radius());
    let near = integrate_substituted(kernel, x, r_cut, |r| 2.0 * x * kernel.density_d1(r));
    let s = kernel.order();
    let tail = -2.0 * x * (2.0 * s + 2.0) * kernel.tail_coef()
        * inv_sqrt_power_tail(2.0 * s + 4.0, x, r_cut);
    near + tail
}

/// Integrates `g(r) / √(r² - x²)` over `r ∈ [x, r_cut]` via `r = x + u²`
/// (so `dr/√(r² - x²) = 2 du/√(u² + 2x)`), with quadrature panels aligned
/// to the kernel's structural radii.
fn integrate_substituted<F: Fn(f64) -> f64>(
    kernel: &MollifierSpec,
    x: f64,
    r_cut: f64,
    g: F,
) -> f64 {
    let u_top = (r_cut - x).sqrt();
    if u_top <= 0.0 {
        return 0.0;
    }
    // Panel knots: kernel feature radii mapped through u = √(r - x).
    let mut knots = vec![0.0, u_top];
    for f in kernel.blend_breaks() {
        if f > x && f < r_cut {
            knots.push((f - x).sqrt());
        }
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    // Grade panels toward u = 0, then quarter every panel.
    let knots = quad::refine_towards(&knots, 0.0, 3);
    let mut fine = Vec::with_capacity(4 * knots.len());
    for w in knots.windows(2) {
        for k in 0..4 {
            fine.push(w[0] + (w[1] - w[0]) * k as f64 / 4.0);
        }
    }
    fine.push(u_top);
    quad::integrate_panels(&fine, 16, |u| {
        let r = x + u * u;
        2.0 * g(r) / (u * u + 2.0 * x).sqrt()
    })
}

/// `∫_R^∞ t^{-p} (1 - (x/t)²)^{-1/2} dt`, expanded as a binomial series in
/// `z = (x/R)²`. Converges geometrically for `z ≤ 1/4`, which the callers
/// guarantee by choosing `R ≥ 2x`.
fn inv_sqrt_power_tail(p: f64, x: f64, r: f64) -> f64 {
    let z = (x / r) * (x / r);
    debug_assert!(z <= 0.25 + 1e-12, "series parameter {z} out of range");
    let mut coef = 1.0;
    let mut zpow = 1.0;
    let mut sum = 0.0;
    for m in 0..60 {
        let term = coef * zpow / (p - 1.0 + 2.0 * m as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        coef *= (2.0 * m as f64 + 1.0) / (2.0 * m as f64 + 2.0);
        zpow *= z;
    }
    r.powf(1.0 - p) * sum
}

/// Builds the ramp profile table for a kernel.
pub fn build_ramp(kernel: &MollifierSpec) -> Result<RampProfile> {
    let s = kernel.order();
    let r_tail = kernel.tail_radius();
    let h = r_tail / CELLS as f64;

    // Marginal and its derivative at the uniform nodes, by quadrature.
    let n = CELLS + 1;
    let mut p2 = Vec::with_capacity(n);
    let mut p3 = Vec::with_capacity(n);
    for i in 0..n {
        let x = i as f64 * h;
        p2.push(marginal(kernel, x));
        p3.push(marginal_d(kernel, x));
    }

    // Seam audit: at the tail node the closed forms are exact, so the gap
    // there measures the quadrature error of the whole inner machinery.
    let q_closed = 2.0 * s * r_tail.powf(-2.0 * s - 1.0);
    let qd_closed = -2.0 * s * (2.0 * s + 1.0) * r_tail.powf(-2.0 * s - 2.0);
    let seam_defect = ((p2[CELLS] - q_closed) / q_closed)
        .abs()
        .max(((p3[CELLS] - qd_closed) / qd_closed).abs());
    // Anchor the last node on the exact values so the seam is seamless.
    p2[CELLS] = q_closed;
    p3[CELLS] = qd_closed;

    // Backward suffix integrals from the anchored tail node, one cell at a
    // time with the derivative-corrected (Euler–Maclaurin) trapezoid rule:
    //   ∫_a^{a+h} f = h/2 (f_a + f_{a+h}) + h²/12 (f'_a - f'_{a+h}) + O(h⁵).
    // `sq[i] = ∫_{x_i}^{r_tail} q`, `sxq[i] = ∫_{x_i}^{r_tail} t·q(t) dt`.
    let mut sq = vec![0.0; n];
    let mut sxq = vec![0.0; n];
    for i in (0..CELLS).rev() {
        let x_lo = i as f64 * h;
        let x_hi = (i + 1) as f64 * h;
        sq[i] = sq[i + 1]
            + 0.5 * h * (p2[i] + p2[i + 1])
            + h * h / 12.0 * (p3[i] - p3[i + 1]);
        let f_lo = x_lo * p2[i];
        let f_hi = x_hi * p2[i + 1];
        let fd_lo = p2[i] + x_lo * p3[i];
        let fd_hi = p2[i + 1] + x_hi * p3[i + 1];
        sxq[i] = sxq[i + 1] + 0.5 * h * (f_lo + f_hi) + h * h / 12.0 * (fd_lo - fd_hi);
    }

    // Closed anchors at the tail radius.
    let p_anchor = r_tail.powf(1.0 - 2.0 * s) / (2.0 * s - 1.0);
    let p1_anchor = -r_tail.powf(-2.0 * s);

    //   P'(x) = P'(r₀) - ∫_x^{r₀} q,
    //   P(x)  = ∫_x^{r₀} t q dt - x ∫_x^{r₀} q dt + P(r₀) - (r₀ - x) P'(r₀).
    let mut p0 = Vec::with_capacity(n);
    let mut p1 = Vec::with_capacity(n);
    for i in 0..n {
        let x = i as f64 * h;
        p1.push(p1_anchor - sq[i]);
        p0.push(sxq[i] - x * sq[i] + p_anchor - (r_tail - x) * p1_anchor);
    }

    // Centered-difference slopes of P''' for third-order interpolation.
    let mut d3 = vec![0.0; n];
    d3[0] = (p3[1] - p3[0]) / h;
    d3[n - 1] = (p3[n - 1] - p3[n - 2]) / h;
    for i in 1..n - 1 {
        d3[i] = (p3[i + 1] - p3[i - 1]) / (2.0 * h);
    }

    let profile = RampProfile { s, r_tail, h, p: [p0, p1, p2, p3], d3, seam_defect };
    profile.validate(kernel)?;
    Ok(profile)
}

impl RampProfile {
    /// Fractional order the profile was built for.
    pub fn order(&self) -> f64 {
        self.s
    }

    /// Radius beyond which all four orders are exact closed forms.
    pub fn tail_radius(&self) -> f64 {
        self.r_tail
    }

    /// Normalized quadrature-vs-closed-form gap measured at the tail node.
    pub fn seam_defect(&self) -> f64 {
        self.seam_defect
    }

    /// Evaluates `P^{(order)}(x)` for `x ≥ 0`, `order ≤ 3`.
    pub fn eval(&self, x: f64, order: usize) -> f64 {
        assert!(order <= 3, "derivative order {order} out of range");
        assert!(x >= 0.0 && x.is_finite(), "ramp argument {x} out of range");
        if x >= self.r_tail {
            let s2 = 2.0 * self.s;
            return match order {
                0 => x.powf(1.0 - s2) / (s2 - 1.0),
                1 => -x.powf(-s2),
                2 => s2 * x.powf(-s2 - 1.0),
                _ => -s2 * (s2 + 1.0) * x.powf(-s2 - 2.0),
            };
        }
        let i = ((x / self.h) as usize).min(CELLS - 1);
        let t = (x - i as f64 * self.h) / self.h;
        let [p0, p1, p2, p3] = &self.p;
        match order {
            0 => hermite_quintic(
                self.h, p0[i], p1[i], p2[i], p0[i + 1], p1[i + 1], p2[i + 1], t,
            ),
            1 => hermite_quintic(
                self.h, p1[i], p2[i], p3[i], p1[i + 1], p2[i + 1], p3[i + 1], t,
            ),
            2 => hermite_cubic(self.h, p2[i], p3[i], p2[i + 1], p3[i + 1], t),
            _ => hermite_cubic(self.h, p3[i], self.d3[i], p3[i + 1], self.d3[i + 1], t),
        }
    }

    /// Writes the tabulated profile as CSV (`x,P,P1,P2,P3`).
    pub fn write_csv<W: IoWrite>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "# s={}", fmt::g17(self.s))?;
        writeln!(w, "# r_tail={}", fmt::g17(self.r_tail))?;
        writeln!(w, "x,P,P1,P2,P3")?;
        for i in 0..=CELLS {
            let x = i as f64 * self.h;
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt::g17(x),
                fmt::g17(self.p[0][i]),
                fmt::g17(self.p[1][i]),
                fmt::g17(self.p[2][i]),
                fmt::g17(self.p[3][i]),
            )?;
        }
        Ok(())
    }

    /// Structural validation against the kernel that produced the table.
    fn validate(&self, kernel: &MollifierSpec) -> Result<()> {
        if self.seam_defect > 1e-9 {
            return Err(Error::VerificationFailed(format!(
                "ramp quadrature misses the closed tail forms by {:.3e} at the seam",
                self.seam_defect
            )));
        }
        // Half the kernel mass sits on each side of a line through 0.
        let half = -self.p[1][0];
        if (half - 0.5).abs() > 1e-9 {
            return Err(Error::VerificationFailed(format!(
                "-P'(0) = {half:.12}, expected 1/2: kernel mass is off balance"
            )));
        }
        // P(0) doubles the kernel's second radial moment.
        let m2 = 2.0 * kernel.second_moment();
        if ((self.p[0][0] - m2) / m2).abs() > 1e-7 {
            return Err(Error::VerificationFailed(format!(
                "P(0) = {:.12} vs doubled second moment {m2:.12}",
                self.p[0][0]
            )));
        }
        // P''(0) doubles the zeroth radial moment.
        let m0 = 2.0 * kernel.zeroth_moment();
        if ((self.p[2][0] - m0) / m0).abs() > 1e-7 {
            return Err(Error::VerificationFailed(format!(
                "P''(0) = {:.12} vs doubled zeroth moment {m0:.12}",
                self.p[2][0]
            )));
        }
        // Sign pattern and monotone decay at the nodes.
        for i in 0..=CELLS {
            let [p0, p1, p2, p3] = &self.p;
            if !(p0[i] > 0.0 && p1[i] < 0.0 && p2[i] > 0.0 && p3[i] <= 1e-12) {
                return Err(Error::VerificationFailed(format!(
                    "sign pattern broken at node {i}: {} {} {} {}",
                    p0[i], p1[i], p2[i], p3[i]
                )));
            }
            if i > 0 {
                if p0[i] >= p0[i - 1] || p1[i] <= p1[i - 1] || p2[i] > p2[i - 1] + 1e-15 {
                    return Err(Error::VerificationFailed(format!(
                        "monotone decay broken at node {i}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mollify::kernel::build_mollifier;

    fn default_ramp() -> (MollifierSpec, RampProfile) {
        let kernel = build_mollifier(0.75, 3.0_f64.sqrt()).unwrap();
        let ramp = build_ramp(&kernel).unwrap();
        (kernel, ramp)
    }

    #[test]
    fn half_slope_at_origin() {
        let (_, ramp) = default_ramp();
        assert!(
            (ramp.eval(0.0, 1) + 0.5).abs() < 1e-8,
            "-P'(0) = {}, want 1/2",
            -ramp.eval(0.0, 1)
        );
    }

    /// Frozen: at s = 3/4 the closed tail form gives P(10) = 2/√10.
    #[test]
    fn frozen_value_beyond_tail() {
        let (kernel, ramp) = default_ramp();
        assert!(kernel.tail_radius() < 10.0, "tail radius grew past the probe point");
        let expected = 0.6324555320336759;
        assert!((ramp.eval(10.0, 0) - expected).abs() < 1e-14);
        assert!((ramp.eval(10.0, 1) + 10f64.powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn endpoint_values_match_kernel_moments() {
        let (kernel, ramp) = default_ramp();
        let m2 = 2.0 * kernel.second_moment();
        assert!(
            ((ramp.eval(0.0, 0) - m2) / m2).abs() < 1e-7,
            "P(0) = {} vs {}",
            ramp.eval(0.0, 0),
            m2
        );
        let m0 = 2.0 * kernel.zeroth_moment();
        assert!(
            ((ramp.eval(0.0, 2) - m0) / m0).abs() < 1e-7,
            "P''(0) = {} vs {}",
            ramp.eval(0.0, 2),
            m0
        );
        // P'''(0) = 0 by symmetry of the marginal.
        assert!(ramp.eval(0.0, 3).abs() < 1e-10);
    }

    #[test]
    fn seam_is_continuous_across_the_tail_radius() {
        let (_, ramp) = default_ramp();
        let r0 = ramp.tail_radius();
        assert!(ramp.seam_defect() < 1e-9, "seam defect {}", ramp.seam_defect());
        let eps = 1e-7;
        for order in 0..=3 {
            let inner = ramp.eval(r0 - eps, order);
            let outer = ramp.eval(r0 + eps, order);
            let scale = outer.abs().max(1e-6);
            assert!(
                ((inner - outer) / scale).abs() < 1e-6,
                "order {order}: {inner} vs {outer}"
            );
        }
        // Tight check right at the last table node against the closed forms.
        let s2 = 1.5;
        assert!((ramp.eval(r0, 0) - r0.powf(1.0 - s2) / (s2 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn derivatives_are_consistent_under_finite_differences() {
        let (_, ramp) = default_ramp();
        let r0 = ramp.tail_radius();
        let step = 1e-5;
        for k in 1..=20 {
            let x = r0 * k as f64 / 21.0;
            for order in 0..3 {
                let fd =
                    (ramp.eval(x + step, order) - ramp.eval(x - step, order)) / (2.0 * step);
                let an = ramp.eval(x, order + 1);
                let scale = an.abs().max(1e-4);
                assert!(
                    ((fd - an) / scale).abs() < 2e-4,
                    "x = {x}, order {order}: fd {fd} vs {an}"
                );
            }
        }
    }

    #[test]
    fn envelopes_and_signs_hold_over_the_working_range() {
        let (_, ramp) = default_ramp();
        let s = ramp.order();
        let r0 = ramp.tail_radius();
        // Signs on (0, 3r₀].
        for k in 1..=600 {
            let x = 3.0 * r0 * k as f64 / 600.0;
            assert!(ramp.eval(x, 0) > 0.0, "P sign at {x}");
            assert!(ramp.eval(x, 1) < 0.0, "P' sign at {x}");
            assert!(ramp.eval(x, 2) > 0.0, "P'' sign at {x}");
            if x >= 0.1 {
                assert!(ramp.eval(x, 3) < 0.0, "P''' sign at {x}");
            }
        }
        // Two-sided power-law envelopes (1+x)^{-(2s-1+i)} for the value and
        // the first derivative over the whole working range.
        for order in 0..=1 {
            let mut lo = f64::INFINITY;
            let mut hi = 0.0_f64;
            for k in 0..=600 {
                let x = 3.0 * r0 * k as f64 / 600.0;
                let e = ramp.eval(x, order).abs()
                    * (1.0 + x).powf(2.0 * s - 1.0 + order as f64);
                lo = lo.min(e);
                hi = hi.max(e);
            }
            assert!(
                hi / lo < 100.0,
                "order {order}: envelope ratio {} out of range",
                hi / lo
            );
        }
        // Beyond the tail radius the higher orders are exact powers; check
        // the envelope there where the lower bound cannot degenerate.
        for order in 2..=3 {
            let mut lo = f64::INFINITY;
            let mut hi = 0.0_f64;
            for k in 0..=200 {
                let x = r0 + 2.0 * r0 * k as f64 / 200.0;
                let e = ramp.eval(x, order).abs()
                    * (1.0 + x).powf(2.0 * s - 1.0 + order as f64);
                lo = lo.min(e);
                hi = hi.max(e);
            }
            assert!(hi / lo < 100.0, "order {order}: tail envelope ratio {}", hi / lo);
        }
    }

    #[test]
    fn rebuild_is_bit_identical() {
        let kernel = build_mollifier(0.75, 3.0_f64.sqrt()).unwrap();
        let a = build_ramp(&kernel).unwrap();
        let b = build_ramp(&kernel).unwrap();
        for order in 0..4 {
            assert_eq!(a.p[order].len(), b.p[order].len());
            for i in 0..a.p[order].len() {
                assert_eq!(a.p[order][i].to_bits(), b.p[order][i].to_bits());
            }
        }
    }

    #[test]
    fn rejects_out_of_range_arguments() {
        let (_, ramp) = default_ramp();
        assert!(std::panic::catch_unwind(|| ramp.eval(-1.0, 0)).is_err());
        assert!(std::panic::catch_unwind(|| ramp.eval(1.0, 4)).is_err());
        assert!(std::panic::catch_unwind(|| ramp.eval(f64::NAN, 0)).is_err());
    }
}
