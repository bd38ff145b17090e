//! Panel-based quadrature helpers built on the Gauss–Legendre rules.

use super::gauss::gauss_legendre;

/// Geometric (log-spaced) breakpoints from `a` to `b` with `panels` panels.
///
/// Requires `0 < a < b`.
pub fn geometric_breaks(a: f64, b: f64, panels: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a, "geometric breaks need 0 < a < b");
    assert!(panels >= 1);
    let ratio = (b / a).powf(1.0 / panels as f64);
    let mut breaks = Vec::with_capacity(panels + 1);
    let mut x = a;
    breaks.push(a);
    for _ in 0..panels {
        x *= ratio;
        breaks.push(x);
    }
    *breaks.last_mut().unwrap() = b; // kill accumulated round-off at the end
    breaks
}

/// Uniform breakpoints from `a` to `b` with `panels` panels.
pub fn uniform_breaks(a: f64, b: f64, panels: usize) -> Vec<f64> {
    assert!(panels >= 1);
    (0..=panels)
        .map(|i| a + (b - a) * i as f64 / panels as f64)
        .collect()
}

/// Integrates `f` over consecutive panels `[breaks[i], breaks[i+1]]` with an
/// `n`-point Gauss–Legendre rule on each.
pub fn integrate_panels<F: FnMut(f64) -> f64>(breaks: &[f64], n: usize, mut f: F) -> f64 {
    let rule = gauss_legendre(n);
    let mut acc = 0.0;
    for w in breaks.windows(2) {
        acc += rule.integrate(w[0], w[1], &mut f);
    }
    acc
}

/// Splits the panel containing `center` dyadically towards `center`,
/// `levels` times, producing breakpoints refined near a feature.
///
/// Starting from sorted `breaks`, each level inserts midpoints of the two
/// panels adjacent to `center`. Deterministic given the inputs.
pub fn refine_towards(breaks: &[f64], center: f64, levels: usize) -> Vec<f64> {
    let mut b = breaks.to_vec();
    for _ in 0..levels {
        // Locate the panel containing (or nearest to) the feature.
        let mut idx = b.partition_point(|&x| x < center);
        idx = idx.clamp(1, b.len() - 1);
        let lo = b[idx - 1];
        let hi = b[idx];
        let mid = 0.5 * (lo + hi);
        b.insert(idx, mid);
    }
    b.sort_by(|p, q| p.partial_cmp(q).unwrap());
    b.dedup();
    b
}
