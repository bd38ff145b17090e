//! Small least-squares helpers for decay-rate measurements.

/// Result of a straight-line least-squares fit `y ≈ slope · x + intercept`.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    /// Fitted slope.
    pub slope: f64,
    /// Fitted intercept.
    pub intercept: f64,
    /// Coefficient of determination in `[0, 1]`.
    pub r2: f64,
}

/// Ordinary least squares for `y ≈ a x + b`.
///
/// Panics if fewer than two points are supplied.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len(), "mismatched fit data lengths");
    assert!(xs.len() >= 2, "need at least two points to fit a line");
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    LineFit { slope, intercept, r2 }
}

/// Log–log power-law fit `|y| ≈ C x^p`, returning `(p, C, r2)`.
///
/// Points with `x <= 0` or `|y|` below `floor` are skipped (quadrature noise
/// would otherwise dominate the fit). Panics if fewer than two usable points
/// remain.
pub fn fit_power_law(xs: &[f64], ys: &[f64], floor: f64) -> (f64, f64, f64) {
    let mut lx = Vec::with_capacity(xs.len());
    let mut ly = Vec::with_capacity(ys.len());
    for (&x, &y) in xs.iter().zip(ys) {
        if x > 0.0 && y.abs() > floor {
            lx.push(x.ln());
            ly.push(y.abs().ln());
        }
    }
    let fit = fit_line(&lx, &ly);
    (fit.slope, fit.intercept.exp(), fit.r2)
}

/// Best amplitude `A` for the single-parameter model `y ≈ A x^p` with the
/// exponent `p` held fixed: `A = Σ y x^p / Σ x^{2p}`.
pub fn fit_amplitude_fixed_power(xs: &[f64], ys: &[f64], p: f64) -> f64 {
    assert_eq!(xs.len(), ys.len(), "mismatched fit data lengths");
    let mut num = 0.0;
    let mut den = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let xp = x.powf(p);
        num += y * xp;
        den += xp * xp;
    }
    assert!(den > 0.0, "degenerate fixed-power fit");
    num / den
}
