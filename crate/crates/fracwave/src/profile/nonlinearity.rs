//! Bistable reaction terms and their derived constants.

use crate::error::{Error, Result};
use std::sync::Arc;

/// Step used for finite-difference derivatives of the user-supplied callable.
const FD_STEP: f64 = 1e-5;

/// A bistable reaction term `f` with zeros at `±1` and at an interior point
/// `t0 ∈ (−1, 1)`, negative on `(−1, t0)` and positive on `(t0, 1)`, with
/// `f′(±1) < 0`.
///
/// Alongside the callable, the type carries the derived constants used by the
/// travelling-front machinery:
///
/// * `delta_star ∈ (0, 1/4)` and `kappa1 > 0` such that `−f′(t) > kappa1`
///   whenever `1 − |t| < 2·delta_star`,
/// * `kappa2 = sup |f′|` on `[−1 − delta_star, 1 + delta_star]`.
#[derive(Clone)]
pub struct Nonlinearity {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    t0: f64,
    delta_star: f64,
    kappa1: f64,
    kappa2: f64,
}

impl std::fmt::Debug for Nonlinearity {
    fn fmt(&self, fmt: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fmt.debug_struct("Nonlinearity")
            .field("t0", &self.t0)
            .field("delta_star", &self.delta_star)
            .field("kappa1", &self.kappa1)
            .field("kappa2", &self.kappa2)
            .finish()
    }
}

impl Nonlinearity {
    /// Wraps a callable after verifying bistability and deriving the
    /// constants. `t0` is the claimed interior zero.
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static, t0: f64) -> Result<Self> {
        let f: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(f);
        if !(-1.0 < t0 && t0 < 1.0) {
            return Err(Error::invalid("t0", t0, "interior zero must lie in (-1, 1)"));
        }
        for (name, x) in [("f(-1)", -1.0), ("f(1)", 1.0), ("f(t0)", t0)] {
            let v = f(x);
            if v.abs() > 1e-10 {
                return Err(Error::invalid(name, v, "must vanish at the equilibria"));
            }
        }
        // Sign pattern strictly between the zeros (sampled).
        let m = 400;
        for i in 1..m {
            let t = -1.0 + (t0 + 1.0) * i as f64 / m as f64;
            if f(t) >= 0.0 {
                return Err(Error::invalid("f", f(t), "must be negative on (-1, t0)"));
            }
            let t = t0 + (1.0 - t0) * i as f64 / m as f64;
            if f(t) <= 0.0 {
                return Err(Error::invalid("f", f(t), "must be positive on (t0, 1)"));
            }
        }
        let fp = |t: f64| fd_derivative(f.as_ref(), t);
        for x in [-1.0, 1.0] {
            if fp(x) >= 0.0 {
                return Err(Error::invalid("f'", fp(x), "must be negative at ±1"));
            }
        }
        // kappa1: half of the weaker pull at the stable states; delta_star:
        // the widest admissible neighbourhood (capped below 1/4) on which the
        // pull still exceeds kappa1, including the outside strip that the
        // front machinery may overshoot into.
        let kappa1 = 0.5 * (-fp(1.0)).min(-fp(-1.0));
        let mut delta_star = None;
        let mut delta = 0.24;
        while delta > 1e-3 {
            let ok = (0..=200).all(|i| {
                // |t| sweeps [1 - 2δ, 1 + 2δ] on both sides.
                let a = 1.0 - 2.0 * delta + 4.0 * delta * i as f64 / 200.0;
                -fp(a) > kappa1 && -fp(-a) > kappa1
            });
            if ok {
                delta_star = Some(delta);
                break;
            }
            delta -= 0.005;
        }
        let delta_star = delta_star.ok_or_else(|| {
            Error::pre("no neighbourhood of ±1 with the required derivative bound".to_string())
        })?;
        let mut kappa2 = 0.0f64;
        let lo = -1.0 - delta_star;
        let hi = 1.0 + delta_star;
        for i in 0..=2000 {
            let t = lo + (hi - lo) * i as f64 / 2000.0;
            kappa2 = kappa2.max(fp(t).abs());
        }
        Ok(Nonlinearity { f, t0, delta_star, kappa1, kappa2 })
    }

    /// The cubic `f(t) = −(t − t0)(t − 1)(t + 1)`. For `t0 = 0` this is the
    /// odd `t − t³`.
    pub fn cubic(t0: f64) -> Result<Self> {
        Self::new(move |t| -(t - t0) * (t - 1.0) * (t + 1.0), t0)
    }

    /// The sine term `f(t) = (1/π) sin(πt)`, odd with `t0 = 0`; at order
    /// `s = 1/2` its front is the explicit arctangent layer.
    pub fn sine() -> Result<Self> {
        Self::new(|t| (std::f64::consts::PI * t).sin() / std::f64::consts::PI, 0.0)
    }

    /// Evaluates `f(t)`.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    /// Finite-difference `f′(t)`.
    #[inline]
    pub fn deriv(&self, t: f64) -> f64 {
        fd_derivative(self.f.as_ref(), t)
    }

    /// The interior zero.
    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// Width of the verified neighbourhood of `±1`.
    pub fn delta_star(&self) -> f64 {
        self.delta_star
    }

    /// Lower bound for `−f′` on `{1 − |t| < 2·delta_star}`.
    pub fn kappa1(&self) -> f64 {
        self.kappa1
    }

    /// `sup |f′|` on `[−1 − delta_star, 1 + delta_star]`.
    pub fn kappa2(&self) -> f64 {
        self.kappa2
    }
}

/// Five-point central difference, `O(step⁴)`.
fn fd_derivative(f: &(dyn Fn(f64) -> f64 + Send + Sync), t: f64) -> f64 {
    let h = FD_STEP;
    (f(t - 2.0 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2.0 * h)) / (12.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_constants() {
        let f = Nonlinearity::cubic(-0.3).unwrap();
        // f'(t) = -(3t² + 0.6t - 1): f'(1) = -2.6, f'(-1) = -1.4.
        assert!((f.deriv(1.0) + 2.6).abs() < 1e-8);
        assert!((f.deriv(-1.0) + 1.4).abs() < 1e-8);
        assert!((f.kappa1() - 0.7).abs() < 1e-8);
        assert!(f.delta_star() > 0.0 && f.delta_star() < 0.25);
        // The bound must really hold on the strip.
        for i in 0..=100 {
            let a = 1.0 - 2.0 * f.delta_star() + 4.0 * f.delta_star() * i as f64 / 100.0;
            assert!(-f.deriv(a) > f.kappa1());
            assert!(-f.deriv(-a) > f.kappa1());
        }
        // kappa2 at least |f'(±1)| and at least the interior max 1 + t0²/3.
        assert!(f.kappa2() >= 2.6 - 1e-9);
    }

    #[test]
    fn sine_is_odd_bistable() {
        let f = Nonlinearity::sine().unwrap();
        assert_eq!(f.t0(), 0.0);
        assert!((f.eval(0.5) - 1.0 / std::f64::consts::PI).abs() < 1e-12);
        assert!((f.deriv(1.0) + 1.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_non_bistable() {
        // Wrong sign pattern: +(t - t0)(t - 1)(t + 1).
        assert!(Nonlinearity::new(|t| (t - 0.1) * (t - 1.0) * (t + 1.0), 0.1).is_err());
        // Zero displaced from t0.
        assert!(Nonlinearity::new(|t| -(t - 0.2) * (t - 1.0) * (t + 1.0), 0.1).is_err());
        // t0 outside (-1, 1).
        assert!(Nonlinearity::cubic(1.5).is_err());
    }
}
