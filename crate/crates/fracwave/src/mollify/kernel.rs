//! Radially symmetric smoothing kernel: unit plateau, C-infinity monotone
//! descent, exact algebraic tail.
//!
//! The kernel `ρ(x, y) = ρ̃(√(x² + y²))` is pinned down by three requirements
//! that the surface machinery downstream leans on:
//!
//! * **unit mass** — `2π ∫₀^∞ r ρ̃(r) dr = 1`, so convolution against the
//!   kernel reproduces affine functions exactly;
//! * **plateau** — `ρ̃ ≡ 1` on `[0, r̃₀]`, so the kernel is genuinely flat at
//!   the origin;
//! * **algebraic tail** — `ρ̃(r) = ρ̃₀ r^{-2s-2}` exactly for `r ≥ r₀`, with
//!   `ρ̃₀ = 2s / B(1/2, 1/2 + s)`. That constant makes the one-dimensional
//!   marginal `∫ ρ(x, y) dy` equal the pure power `2s·x^{-2s-1}` beyond the
//!   tail radius, which is what closes the mollified half-ramp profile in
//!   closed form there.
//!
//! Between plateau and tail the kernel is `exp(-∫_{r̃₀}^r β)` for a
//! C-infinity descent rate `β ≥ 0` — so the kernel is monotone by
//! construction — assembled from two pieces:
//!
//! * a smooth step that switches on the tail's exact logarithmic slope
//!   `(2s+2)/r` shortly before `r₀`, making the junction with the tail flat
//!   to all orders, and
//! * a movable bump whose amplitude is fixed so the accumulated drop lands
//!   exactly on the tail value at `r₀`, and whose **position** is the single
//!   root-finding knob: sliding the bump outward keeps the kernel near 1
//!   longer and increases the mass monotonically, so bisection on the
//!   position hits unit mass to ~1e-12.
//!
//! The tail-start radius `r₀` must satisfy the slope-feasibility inequality
//! `2s (m*² + 2) (2 r₀)^{-2s} < 1` **and** leave enough room for a monotone
//! descent of unit total mass; the builder grows `r₀` automatically until
//! both hold and records the final value.

use std::io::{self, Write as IoWrite};

use crate::error::{Error, Result};
use crate::util::fmt;
use crate::util::gauss;
use crate::util::interp::UniformTable1;
use crate::util::special;

/// Default plateau radius.
pub const DEFAULT_PLATEAU_RADIUS: f64 = 0.1;

/// `e⁴`, which normalizes the peak of `exp(-1/t)·exp(-1/(1-t))` to one.
const BUMP_PEAK_INV: f64 = 54.598150033144236;

/// Blend coordinate where the tail-slope step begins.
const STEP_Q_LO: f64 = 0.93;
/// Blend coordinate where the tail-slope step saturates.
const STEP_Q_HI: f64 = 0.99;
/// Number of table cells across the blend interval.
const BLEND_CELLS: usize = 2048;

/// C-infinity cutoff: `exp(-1/t)` for `t > 0`, identically zero otherwise.
fn cutoff(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Derivative of [`cutoff`].
fn cutoff_d(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp() / (t * t)
    }
}

/// C-infinity step: 0 for `t ≤ 0`, 1 for `t ≥ 1`, strictly monotone between.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = cutoff(t);
    let b = cutoff(1.0 - t);
    a / (a + b)
}

/// Derivative of [`smooth_step`].
fn smooth_step_d(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let a = cutoff(t);
    let b = cutoff(1.0 - t);
    let da = cutoff_d(t);
    let db = cutoff_d(1.0 - t);
    (da * b + a * db) / ((a + b) * (a + b))
}

/// Unit-peak C-infinity bump supported on `(0, 1)`, flat at both ends.
fn smooth_bump(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    cutoff(t) * cutoff(1.0 - t) * BUMP_PEAK_INV
}

/// Derivative of [`smooth_bump`].
fn smooth_bump_d(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    (cutoff_d(t) * cutoff(1.0 - t) - cutoff(t) * cutoff_d(1.0 - t)) * BUMP_PEAK_INV
}

/// Descent rate `β(r) = -d/dr log ρ̃(r)` on the blend interval `[r̃₀, r₀]`.
#[derive(Debug, Clone)]
struct Descent {
    s: f64,
    r_lo: f64,
    r_hi: f64,
    /// Bump support start, in blend coordinates `q = (r - r̃₀)/(r₀ - r̃₀)`.
    bump_q0: f64,
    /// Bump support width in blend coordinates.
    bump_wq: f64,
    /// Bump amplitude (fixed by matching the tail value at `r₀`).
    amp: f64,
}

impl Descent {
    fn q(&self, r: f64) -> f64 {
        (r - self.r_lo) / (self.r_hi - self.r_lo)
    }

    /// The tail-slope step factor at blend coordinate `q`.
    fn step_at(q: f64) -> f64 {
        smooth_step((q - STEP_Q_LO) / (STEP_Q_HI - STEP_Q_LO))
    }

    fn rate(&self, r: f64) -> f64 {
        let q = self.q(r);
        let tau = (q - self.bump_q0) / self.bump_wq;
        Self::step_at(q) * (2.0 * self.s + 2.0) / r + self.amp * smooth_bump(tau)
    }

    fn rate_d(&self, r: f64) -> f64 {
        let span = self.r_hi - self.r_lo;
        let q = self.q(r);
        let u = (q - STEP_Q_LO) / (STEP_Q_HI - STEP_Q_LO);
        let step = smooth_step(u);
        let step_d = smooth_step_d(u) / ((STEP_Q_HI - STEP_Q_LO) * span);
        let tau = (q - self.bump_q0) / self.bump_wq;
        let bump_d = smooth_bump_d(tau) / (self.bump_wq * span);
        let k = 2.0 * self.s + 2.0;
        step_d * k / r - step * k / (r * r) + self.amp * bump_d
    }
}

/// Radial smoothing kernel with plateau, monotone blend, and algebraic tail.
#[derive(Debug, Clone)]
pub struct MollifierSpec {
    s: f64,
    m_star: f64,
    r_plateau: f64,
    r_tail: f64,
    tail_coef: f64,
    descent: Descent,
    /// Log-density table on the blend: `(log ρ̃, -β, -β')` at uniform nodes.
    ltable: UniformTable1,
    mass_defect: f64,
}

/// Outcome of one attempt to normalize the blend at a fixed tail radius.
struct BuildAttempt {
    descent: Descent,
    ltable: UniformTable1,
    mass_defect: f64,
}

/// Builds the kernel with the default plateau radius.
pub fn build_mollifier(s: f64, m_star: f64) -> Result<MollifierSpec> {
    build_mollifier_with(s, m_star, DEFAULT_PLATEAU_RADIUS)
}

/// Builds the kernel with an explicit plateau radius `r̃₀`.
pub fn build_mollifier_with(s: f64, m_star: f64, r_plateau: f64) -> Result<MollifierSpec> {
    if !(s > 0.5 && s < 1.0) {
        return Err(Error::invalid("s", s, "order must lie in (1/2, 1)"));
    }
    if !(m_star.is_finite() && m_star > 0.0) {
        return Err(Error::invalid("m_star", m_star, "slope must be positive and finite"));
    }
    if !(r_plateau > 0.0 && r_plateau <= 0.5) {
        return Err(Error::invalid(
            "r_plateau",
            r_plateau,
            "plateau radius must lie in (0, 0.5]",
        ));
    }

    let tail_coef = 2.0 * s / special::beta(0.5, 0.5 + s);
    // Slope-feasibility lower bound on the tail radius, with 5% margin.
    let slope_bound = 0.5 * (2.0 * s * (m_star * m_star + 2.0)).powf(1.0 / (2.0 * s));
    let mut r_tail = (1.05 * slope_bound).max(2.5).max(8.0 * r_plateau);

    for _ in 0..16 {
        if let Some(attempt) = try_normalize(s, tail_coef, r_plateau, r_tail) {
            let spec = MollifierSpec {
                s,
                m_star,
                r_plateau,
                r_tail,
                tail_coef,
                descent: attempt.descent,
                ltable: attempt.ltable,
                mass_defect: attempt.mass_defect,
            };
            spec.validate()?;
            return Ok(spec);
        }
        r_tail *= 1.3;
    }
    Err(Error::NoConvergence {
        what: "kernel mass normalization",
        detail: format!(
            "no tail radius up to {r_tail:.3} admits a monotone unit-mass blend (s = {s}, \
             slope = {m_star})"
        ),
    })
}

/// Tries to hit unit mass at a fixed tail radius by bisecting the bump
/// position. Returns `None` when unit mass is outside the achievable range.
fn try_normalize(s: f64, tail_coef: f64, r_lo: f64, r_hi: f64) -> Option<BuildAttempt> {
    let span = r_hi - r_lo;
    let h = span / BLEND_CELLS as f64;
    let rule = gauss::gauss_legendre(8);

    // Total logarithmic drop the blend must accumulate.
    let total_drop = -tail_coef.ln() + (2.0 * s + 2.0) * r_hi.ln();

    // Per-cell integrals of the step term (independent of the bump knob).
    let mut step_cells = vec![0.0; BLEND_CELLS];
    let mut step_total = 0.0;
    for (i, cell) in step_cells.iter_mut().enumerate() {
        let a = r_lo + i as f64 * h;
        *cell = rule.integrate(a, a + h, |r| {
            Descent::step_at((r - r_lo) / span) * (2.0 * s + 2.0) / r
        });
        step_total += *cell;
    }
    // The bump must contribute a nonnegative drop with some headroom.
    if total_drop - step_total < 0.25 {
        return None;
    }

    let bump_wq = (0.35 / span).min(0.30);
    let q_min = 0.005;
    let q_max = 0.92 - bump_wq;
    if q_max <= q_min {
        return None;
    }

    let plateau_mass = std::f64::consts::PI * r_lo * r_lo;
    let tail_mass = std::f64::consts::TAU * tail_coef * r_hi.powf(-2.0 * s) / (2.0 * s);

    // Builds the log-density table at a given bump position and returns it
    // with the total mass. The bump amplitude is derived from the same
    // per-cell quadrature that accumulates the table, so the blend endpoint
    // lands on the tail value to rounding accuracy.
    let build = |bump_q0: f64| -> (Descent, UniformTable1, f64) {
        let mut probe = Descent { s, r_lo, r_hi, bump_q0, bump_wq, amp: 1.0 };
        let mut bump_cells = vec![0.0; BLEND_CELLS];
        let mut bump_total = 0.0;
        for (i, cell) in bump_cells.iter_mut().enumerate() {
            let a = r_lo + i as f64 * h;
            *cell = rule.integrate(a, a + h, |r| {
                smooth_bump((probe.q(r) - bump_q0) / bump_wq)
            });
            bump_total += *cell;
        }
        probe.amp = (total_drop - step_total) / bump_total;

        let n = BLEND_CELLS + 1;
        let mut log_density = Vec::with_capacity(n);
        let mut d1 = Vec::with_capacity(n);
        let mut d2 = Vec::with_capacity(n);
        let mut accumulated = 0.0;
        log_density.push(0.0);
        d1.push(-probe.rate(r_lo));
        d2.push(-probe.rate_d(r_lo));
        for i in 0..BLEND_CELLS {
            accumulated += step_cells[i] + probe.amp * bump_cells[i];
            let r = r_lo + (i + 1) as f64 * h;
            log_density.push(-accumulated);
            d1.push(-probe.rate(r));
            d2.push(-probe.rate_d(r));
        }
        let table = UniformTable1::new(r_lo, h, log_density, d1, d2);

        let mut blend_mass = 0.0;
        for i in 0..BLEND_CELLS {
            let a = r_lo + i as f64 * h;
            blend_mass += rule.integrate(a, a + h, |r| {
                let (log_rho, _, _) = table.eval(r).expect("blend node inside table");
                r * log_rho.exp()
            });
        }
        let mass = plateau_mass + std::f64::consts::TAU * blend_mass + tail_mass;
        (probe, table, mass)
    };

    let (_, _, mass_lo) = build(q_min);
    let (_, _, mass_hi) = build(q_max);
    if mass_lo > 1.0 || mass_hi < 1.0 {
        return None;
    }

    let mut lo = q_min;
    let mut hi = q_max;
    let mut best: Option<BuildAttempt> = None;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let (descent, ltable, mass) = build(mid);
        let defect = mass - 1.0;
        if best.as_ref().is_none_or(|b| defect.abs() < b.mass_defect.abs()) {
            best = Some(BuildAttempt { descent, ltable, mass_defect: defect });
        }
        if defect.abs() < 1e-13 || hi - lo < 1e-15 {
            break;
        }
        if defect > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    best.filter(|b| b.mass_defect.abs() <= 1e-11 && b.descent.amp >= 0.0)
}

impl MollifierSpec {
    /// Fractional order `s` the kernel was built for.
    pub fn order(&self) -> f64 {
        self.s
    }

    /// Facet slope `m*` the tail radius was sized against.
    pub fn slope_limit(&self) -> f64 {
        self.m_star
    }

    /// Plateau radius `r̃₀`: the kernel is identically 1 on `[0, r̃₀]`.
    pub fn plateau_radius(&self) -> f64 {
        self.r_plateau
    }

    /// Tail radius `r₀`: the kernel is exactly `ρ̃₀ r^{-2s-2}` beyond it.
    pub fn tail_radius(&self) -> f64 {
        self.r_tail
    }

    /// Tail constant `ρ̃₀ = 2s / B(1/2, 1/2+s)`.
    pub fn tail_coef(&self) -> f64 {
        self.tail_coef
    }

    /// The root-found shape knob: bump position in blend coordinates.
    pub fn shape_theta(&self) -> f64 {
        self.descent.bump_q0
    }

    /// Derived bump amplitude of the descent rate.
    pub fn bump_amplitude(&self) -> f64 {
        self.descent.amp
    }

    /// Signed unit-mass defect left by the normalization root-find.
    pub fn mass_defect(&self) -> f64 {
        self.mass_defect
    }

    /// Radial profile `ρ̃(r)`.
    pub fn density(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        if r <= self.r_plateau {
            1.0
        } else if r >= self.r_tail {
            self.tail_coef * r.powf(-2.0 * self.s - 2.0)
        } else {
            let (log_rho, _, _) = self.ltable.eval(r).expect("blend radius inside table");
            log_rho.exp()
        }
    }

    /// First radial derivative `ρ̃'(r)` (≤ 0 everywhere).
    pub fn density_d1(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        if r <= self.r_plateau {
            0.0
        } else if r >= self.r_tail {
            -(2.0 * self.s + 2.0) * self.tail_coef * r.powf(-2.0 * self.s - 3.0)
        } else {
            let (log_rho, _, _) = self.ltable.eval(r).expect("blend radius inside table");
            -self.descent.rate(r) * log_rho.exp()
        }
    }

    /// Second radial derivative `ρ̃''(r)`.
    pub fn density_d2(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        if r <= self.r_plateau {
            0.0
        } else if r >= self.r_tail {
            (2.0 * self.s + 2.0) * (2.0 * self.s + 3.0) * self.tail_coef
                * r.powf(-2.0 * self.s - 4.0)
        } else {
            let (log_rho, _, _) = self.ltable.eval(r).expect("blend radius inside table");
            let beta = self.descent.rate(r);
            (beta * beta - self.descent.rate_d(r)) * log_rho.exp()
        }
    }

    /// Planar kernel value `ρ(x, y) = ρ̃(√(x² + y²))`.
    pub fn density_2d(&self, x: f64, y: f64) -> f64 {
        self.density(x.hypot(y))
    }

    /// Radii of the kernel's structural features, for quadrature panelling:
    /// plateau edge, bump support, step window, tail start.
    pub(crate) fn blend_breaks(&self) -> Vec<f64> {
        let span = self.r_tail - self.r_plateau;
        let d = &self.descent;
        vec![
            self.r_plateau,
            self.r_plateau + d.bump_q0 * span,
            self.r_plateau + (d.bump_q0 + d.bump_wq) * span,
            self.r_plateau + STEP_Q_LO * span,
            self.r_tail,
        ]
    }

    /// Recomputes the total mass `2π ∫ r ρ̃ dr` with quadrature independent
    /// of the table construction (geometric panels, Gauss–Legendre 16).
    pub fn radial_mass(&self) -> f64 {
        let plateau = std::f64::consts::PI * self.r_plateau * self.r_plateau;
        let blend = self.panelled_blend_integral(|r| r * self.density(r));
        let tail = std::f64::consts::TAU * self.tail_coef * self.r_tail.powf(-2.0 * self.s)
            / (2.0 * self.s);
        plateau + std::f64::consts::TAU * blend + tail
    }

    /// Second radial moment `∫₀^∞ r² ρ̃(r) dr`. Exact power-law tail,
    /// quadrature on the blend. `2π m*` times this is the surface band width.
    pub fn second_moment(&self) -> f64 {
        let plateau = self.r_plateau.powi(3) / 3.0;
        let blend = self.panelled_blend_integral(|r| r * r * self.density(r));
        let tail = self.tail_coef * self.r_tail.powf(1.0 - 2.0 * self.s) / (2.0 * self.s - 1.0);
        plateau + blend + tail
    }

    /// Zeroth radial moment `∫₀^∞ ρ̃(r) dr`.
    pub fn zeroth_moment(&self) -> f64 {
        let plateau = self.r_plateau;
        let blend = self.panelled_blend_integral(|r| self.density(r));
        let tail = self.tail_coef * self.r_tail.powf(-1.0 - 2.0 * self.s) / (1.0 + 2.0 * self.s);
        plateau + blend + tail
    }

    /// Integrates `f` over the blend interval with feature-aligned panels.
    fn panelled_blend_integral<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let mut breaks = self.blend_breaks();
        breaks.sort_by(f64::total_cmp);
        let mut total = 0.0;
        for w in breaks.windows(2) {
            if w[1] - w[0] < 1e-14 {
                continue;
            }
            for k in 0..8 {
                let a = w[0] + (w[1] - w[0]) * k as f64 / 8.0;
                let b = w[0] + (w[1] - w[0]) * (k + 1) as f64 / 8.0;
                total += gauss::integrate(16, a, b, &f);
            }
        }
        total
    }

    /// Structural validation run after construction.
    fn validate(&self) -> Result<()> {
        // Slope-feasibility inequality for the tail radius.
        let feas = 2.0 * self.s * (self.m_star * self.m_star + 2.0)
            * (2.0 * self.r_tail).powf(-2.0 * self.s);
        if feas >= 1.0 {
            return Err(Error::VerificationFailed(format!(
                "tail radius {:.4} violates the slope-feasibility bound (value {feas:.4})",
                self.r_tail
            )));
        }
        // Monotone, bounded, positive on a fine grid.
        let mut prev = 1.0;
        let top = 1.5 * self.r_tail;
        for i in 0..=8192 {
            let r = top * i as f64 / 8192.0;
            let v = self.density(r);
            if !(v > 0.0 && v <= 1.0 + 1e-14) {
                return Err(Error::VerificationFailed(format!(
                    "kernel value {v:.3e} at r = {r:.4} escapes (0, 1]"
                )));
            }
            if v > prev + 1e-12 {
                return Err(Error::VerificationFailed(format!(
                    "kernel is not monotone near r = {r:.4}"
                )));
            }
            prev = v;
        }
        // Seam continuity where the blend meets the tail.
        let inner = {
            let (log_rho, _, _) =
                self.ltable.eval(self.r_tail).expect("tail radius is the last table node");
            log_rho.exp()
        };
        let outer = self.tail_coef * self.r_tail.powf(-2.0 * self.s - 2.0);
        if ((inner - outer) / outer).abs() > 1e-11 {
            return Err(Error::VerificationFailed(format!(
                "blend/tail seam mismatch: {inner:.16e} vs {outer:.16e}"
            )));
        }
        // Independent mass recomputation.
        let mass = self.radial_mass();
        if (mass - 1.0).abs() > 1e-10 {
            return Err(Error::VerificationFailed(format!(
                "kernel mass {mass:.14} deviates from 1 beyond tolerance"
            )));
        }
        Ok(())
    }

    /// Writes the sampled radial profile as CSV (`r,rho`), with the build
    /// parameters recorded in `#`-prefixed header lines.
    pub fn write_csv<W: IoWrite>(&self, w: &mut W, samples: usize) -> io::Result<()> {
        writeln!(w, "# s={}", fmt::g17(self.s))?;
        writeln!(w, "# m_star={}", fmt::g17(self.m_star))?;
        writeln!(w, "# r_plateau={}", fmt::g17(self.r_plateau))?;
        writeln!(w, "# r_tail={}", fmt::g17(self.r_tail))?;
        writeln!(w, "# tail_coef={}", fmt::g17(self.tail_coef))?;
        writeln!(w, "# theta={}", fmt::g17(self.descent.bump_q0))?;
        writeln!(w, "r,rho")?;
        let top = 2.0 * self.r_tail;
        let n = samples.max(2);
        for i in 0..n {
            let r = top * i as f64 / (n - 1) as f64;
            writeln!(w, "{},{}", fmt::g17(r), fmt::g17(self.density(r)))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::rng;

    /// Frozen: `B(1/2, 5/4) = Γ(1/2)Γ(5/4)/Γ(7/4)`, checked against the
    /// operator-constant test suite.
    const BETA_HALF_FIVE_QUARTERS: f64 = 1.7480383695280799;

    #[test]
    fn tail_constant_follows_the_marginal_normalization() {
        let spec = build_mollifier(0.75, 3.0_f64.sqrt()).unwrap();
        let expected = 1.5 / BETA_HALF_FIVE_QUARTERS;
        assert!(
            (spec.tail_coef() - expected).abs() < 1e-13,
            "tail coefficient {} vs frozen {}",
            spec.tail_coef(),
            expected
        );
        // The defining identity ρ̃₀ · B(1/2, 1/2+s) = 2s across orders.
        for &s in &[0.55, 0.6, 0.75, 0.9, 0.95] {
            let spec = build_mollifier(s, 1.0).unwrap();
            let lhs = spec.tail_coef() * special::beta(0.5, 0.5 + s);
            assert!((lhs - 2.0 * s).abs() < 1e-12, "s = {s}: {lhs} vs {}", 2.0 * s);
        }
    }

    #[test]
    fn plateau_tail_and_monotone_shape_hold() {
        for &s in &[0.55, 0.75, 0.95] {
            let spec = build_mollifier(s, 3.0_f64.sqrt()).unwrap();
            // Plateau is exactly one.
            for &r in &[0.0, 0.03, 0.099, spec.plateau_radius()] {
                assert_eq!(spec.density(r), 1.0, "s = {s}, plateau at r = {r}");
            }
            // Tail matches the closed form bit for bit.
            let r0 = spec.tail_radius();
            for &r in &[r0, 1.7 * r0, 10.0 * r0] {
                let expect = spec.tail_coef() * r.powf(-2.0 * s - 2.0);
                assert_eq!(spec.density(r), expect, "s = {s}, tail at r = {r}");
            }
            // Monotone nonincreasing, bounded in (0, 1].
            let mut prev = 1.0;
            for i in 0..=4096 {
                let r = 1.4 * r0 * i as f64 / 4096.0;
                let v = spec.density(r);
                assert!(v > 0.0 && v <= 1.0, "s = {s}: value {v} at r = {r}");
                assert!(v <= prev + 1e-12, "s = {s}: increase at r = {r}");
                prev = v;
            }
            // Seam continuity, both seams, relative scale.
            let eps = 1e-9;
            let a = spec.density(spec.plateau_radius() - eps);
            let b = spec.density(spec.plateau_radius() + eps);
            assert!((a - b).abs() < 1e-8, "plateau seam: {a} vs {b}");
            let c = spec.density(r0 - eps);
            let d = spec.density(r0 + eps);
            assert!(((c - d) / d).abs() < 1e-8, "tail seam: {c} vs {d}");
        }
    }

    #[test]
    fn unit_mass_is_hit_and_the_tail_radius_is_feasible() {
        let m_star = 3.0_f64.sqrt();
        let spec = build_mollifier(0.75, m_star).unwrap();
        assert!(
            (spec.radial_mass() - 1.0).abs() < 1e-10,
            "independent mass recomputation: {}",
            spec.radial_mass()
        );
        assert!(spec.mass_defect().abs() < 1e-11, "defect {}", spec.mass_defect());

        // Slope-feasibility: 2s(m*² + 2)(2r₀)^{-2s} < 1, and the builder's
        // starting point already respects the same bound with 5% margin.
        let s = 0.75;
        let lhs = 2.0 * s * (m_star * m_star + 2.0) * (2.0 * spec.tail_radius()).powf(-2.0 * s);
        assert!(lhs < 1.0, "feasibility value {lhs}");
        let bound = 0.5 * (2.0 * s * (m_star * m_star + 2.0)).powf(1.0 / (2.0 * s));
        assert!((1.85..1.97).contains(&bound), "slope bound {bound}");
        assert!(spec.tail_radius() >= 1.05 * bound);
        assert!(spec.tail_radius() >= 2.5);

        // Same normalization across the order range.
        for &s in &[0.55, 0.6, 0.9, 0.95] {
            let spec = build_mollifier(s, m_star).unwrap();
            assert!(
                (spec.radial_mass() - 1.0).abs() < 1e-10,
                "s = {s}: mass {}",
                spec.radial_mass()
            );
            assert!(spec.bump_amplitude() >= 0.0);
        }
    }

    #[test]
    fn radial_derivatives_match_finite_differences() {
        for &s in &[0.55, 0.75] {
            let spec = build_mollifier(s, 3.0_f64.sqrt()).unwrap();
            let r0 = spec.tail_radius();
            let rp = spec.plateau_radius();
            let step = 1e-5;
            let mut radii = vec![
                0.5 * rp,
                rp + 0.02,
                rp + 0.2 * (r0 - rp),
                rp + 0.45 * (r0 - rp),
                rp + 0.7 * (r0 - rp),
                rp + 0.95 * (r0 - rp),
                1.3 * r0,
            ];
            radii.extend(spec.blend_breaks().iter().map(|b| b + 0.013));
            for r in radii {
                if r < 2.0 * step {
                    continue;
                }
                let d1 = spec.density_d1(r);
                let fd1 = (spec.density(r + step) - spec.density(r - step)) / (2.0 * step);
                let scale1 = d1.abs().max(1e-3);
                assert!(
                    (d1 - fd1).abs() / scale1 < 5e-5,
                    "s = {s}, r = {r}: d1 {d1} vs fd {fd1}"
                );
                let d2 = spec.density_d2(r);
                let fd2 = (spec.density(r + step) - 2.0 * spec.density(r)
                    + spec.density(r - step))
                    / (step * step);
                let scale2 = d2.abs().max(1e-2);
                assert!(
                    (d2 - fd2).abs() / scale2 < 5e-4,
                    "s = {s}, r = {r}: d2 {d2} vs fd {fd2}"
                );
                assert!(d1 <= 0.0, "descent violated at r = {r}");
            }
        }
    }

    #[test]
    fn construction_validates_inputs_and_is_deterministic() {
        assert!(build_mollifier(0.5, 1.0).is_err());
        assert!(build_mollifier(1.0, 1.0).is_err());
        assert!(build_mollifier(0.75, 0.0).is_err());
        assert!(build_mollifier(0.75, f64::NAN).is_err());
        assert!(build_mollifier_with(0.75, 1.0, 0.0).is_err());
        assert!(build_mollifier_with(0.75, 1.0, 0.9).is_err());

        // Plateau override honored.
        let spec = build_mollifier_with(0.75, 1.0, 0.2).unwrap();
        assert_eq!(spec.plateau_radius(), 0.2);
        assert_eq!(spec.density(0.19), 1.0);

        // Bit-level determinism of the built kernel.
        let a = build_mollifier(0.75, 3.0_f64.sqrt()).unwrap();
        let b = build_mollifier(0.75, 3.0_f64.sqrt()).unwrap();
        assert_eq!(a.shape_theta().to_bits(), b.shape_theta().to_bits());
        assert_eq!(a.bump_amplitude().to_bits(), b.bump_amplitude().to_bits());
        assert_eq!(a.tail_radius().to_bits(), b.tail_radius().to_bits());
        let mut gen = rng::seeded(61);
        for _ in 0..50 {
            let r = rng::uniform(&mut gen, 0.0, 2.0 * a.tail_radius());
            assert_eq!(a.density(r).to_bits(), b.density(r).to_bits());
        }
    }

    #[test]
    fn second_moment_and_zeroth_moment_are_finite_and_positive() {
        let spec = build_mollifier(0.75, 3.0_f64.sqrt()).unwrap();
        let m2 = spec.second_moment();
        let m0 = spec.zeroth_moment();
        assert!(m2.is_finite() && m2 > 0.0);
        assert!(m0.is_finite() && m0 > 0.0);
        // The plateau alone contributes its exact share.
        assert!(m2 > spec.plateau_radius().powi(3) / 3.0);
        assert!(m0 > spec.plateau_radius());
    }
}
