//! The solved one-dimensional front: tables, tail model, interpolation, I/O.

use crate::error::{Error, Result};
use crate::util::fmt::g17;
use crate::util::interp::UniformTable1;
use std::io::{BufRead, Write};

/// Algebraic tail model fitted on the outer windows:
///
/// ```text
/// μ → −∞:  Φ ≈ +1 − A₊ |μ|^{−2s},   Φ′ ≈ −B₊ |μ|^{−1−2s}
/// μ → +∞:  Φ ≈ −1 + A₋ |μ|^{−2s},   Φ′ ≈ −B₋ |μ|^{−1−2s}
/// ```
///
/// (The subscript names the limit value the front approaches on that side.)
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailModel {
    /// Amplitude of `1 − Φ` as μ → −∞.
    pub a_plus: f64,
    /// Amplitude of `1 + Φ` as μ → +∞.
    pub a_minus: f64,
    /// Amplitude of `−Φ′` as μ → −∞.
    pub b_plus: f64,
    /// Amplitude of `−Φ′` as μ → +∞.
    pub b_minus: f64,
}

/// A solved front `(k, Φ)` on a uniform grid over `[−M, M]`.
///
/// Values between nodes come from quintic Hermite interpolation of the
/// `(Φ, Φ′, Φ″)` tables; beyond `±M` the algebraic [`TailModel`] takes over.
#[derive(Debug, Clone)]
pub struct ProfileSolution {
    /// Operator order.
    pub s: f64,
    /// Front speed in the co-moving frame.
    pub k: f64,
    /// Domain half-width.
    pub m: f64,
    /// Interpolation table over the uniform nodes (holds μ₀, spacing, and the
    /// Φ, Φ′, Φ″ columns).
    pub table: UniformTable1,
    /// Fitted algebraic tails.
    pub tail: TailModel,
}

impl ProfileSolution {
    /// Node abscissae.
    pub fn mu(&self) -> Vec<f64> {
        (0..self.table.y.len())
            .map(|i| self.table.x0 + self.table.h * i as f64)
            .collect()
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.table.y.len()
    }

    /// Raw table entries `(Φ, Φ′, Φ″)` at node `i`.
    pub fn node(&self, i: usize) -> (f64, f64, f64) {
        (self.table.y[i], self.table.d1[i], self.table.d2[i])
    }

    /// Whether the table is empty (never true for a constructed solution).
    pub fn is_empty(&self) -> bool {
        self.table.y.is_empty()
    }

    /// Front value at any `μ` (interpolant inside, tail model outside).
    pub fn value(&self, mu: f64) -> f64 {
        match self.table.eval(mu) {
            Some((v, _, _)) => v,
            None => self.tail_value(mu),
        }
    }

    /// Front slope at any `μ`.
    pub fn deriv(&self, mu: f64) -> f64 {
        match self.table.eval(mu) {
            Some((_, d, _)) => d,
            None => self.tail_deriv(mu),
        }
    }

    /// Front curvature at any `μ`.
    pub fn deriv2(&self, mu: f64) -> f64 {
        match self.table.eval(mu) {
            Some((_, _, d2)) => d2,
            None => self.tail_deriv2(mu),
        }
    }

    /// Tail-model value (valid for `|μ| ≥ M`, defined everywhere except 0).
    pub fn tail_value(&self, mu: f64) -> f64 {
        let p = mu.abs().powf(-2.0 * self.s);
        if mu < 0.0 {
            1.0 - self.tail.a_plus * p
        } else {
            -1.0 + self.tail.a_minus * p
        }
    }

    fn tail_deriv(&self, mu: f64) -> f64 {
        let p = mu.abs().powf(-1.0 - 2.0 * self.s);
        if mu < 0.0 {
            -self.tail.b_plus * p
        } else {
            -self.tail.b_minus * p
        }
    }

    fn tail_deriv2(&self, mu: f64) -> f64 {
        let p = mu.abs().powf(-2.0 - 2.0 * self.s);
        if mu < 0.0 {
            -(1.0 + 2.0 * self.s) * self.tail.b_plus * p
        } else {
            (1.0 + 2.0 * self.s) * self.tail.b_minus * p
        }
    }

    /// The front as a 3-D callable along the first coordinate, for the
    /// pointwise operator.
    pub fn callable(&self) -> impl Fn([f64; 3]) -> f64 + '_ {
        move |p| self.value(p[0])
    }

    /// Whether the speed is positive (three-dimensional front construction
    /// requires `k > 0`).
    pub fn admits_pyramid(&self) -> bool {
        self.k > 0.0
    }

    /// Writes the header + CSV representation (17 significant digits,
    /// bit-exact round-trip via [`ProfileSolution::read_from`]).
    pub fn write_to(&self, w: &mut dyn Write) -> Result<()> {
        writeln!(w, "# s={}", g17(self.s))?;
        writeln!(w, "# k={}", g17(self.k))?;
        writeln!(w, "# M={}", g17(self.m))?;
        writeln!(w, "# tail_A_plus={}", g17(self.tail.a_plus))?;
        writeln!(w, "# tail_A_minus={}", g17(self.tail.a_minus))?;
        writeln!(w, "# tail_B_plus={}", g17(self.tail.b_plus))?;
        writeln!(w, "# tail_B_minus={}", g17(self.tail.b_minus))?;
        writeln!(w, "mu,phi,phi1,phi2")?;
        for i in 0..self.len() {
            let mu = self.table.x0 + self.table.h * i as f64;
            writeln!(
                w,
                "{},{},{},{}",
                g17(mu),
                g17(self.table.y[i]),
                g17(self.table.d1[i]),
                g17(self.table.d2[i])
            )?;
        }
        Ok(())
    }

    /// Parses the representation produced by [`ProfileSolution::write_to`].
    pub fn read_from(r: &mut dyn BufRead) -> Result<Self> {
        let mut header = std::collections::HashMap::new();
        let mut mu = Vec::new();
        let mut phi = Vec::new();
        let mut phi1 = Vec::new();
        let mut phi2 = Vec::new();
        let mut saw_columns = false;
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some((key, val)) = rest.split_once('=') {
                    let v: f64 = val
                        .trim()
                        .parse()
                        .map_err(|_| Error::format(format!("bad header number: {line}")))?;
                    header.insert(key.trim().to_string(), v);
                }
                continue;
            }
            if line == "mu,phi,phi1,phi2" {
                saw_columns = true;
                continue;
            }
            let mut it = line.split(',');
            let mut next = || -> Result<f64> {
                it.next()
                    .ok_or_else(|| Error::format(format!("short row: {line}")))?
                    .trim()
                    .parse()
                    .map_err(|_| Error::format(format!("bad number in row: {line}")))
            };
            mu.push(next()?);
            phi.push(next()?);
            phi1.push(next()?);
            phi2.push(next()?);
        }
        if !saw_columns {
            return Err(Error::format("missing column header row".to_string()));
        }
        if mu.len() < 8 {
            return Err(Error::format("too few profile rows".to_string()));
        }
        let get = |k: &str| -> Result<f64> {
            header
                .get(k)
                .copied()
                .ok_or_else(|| Error::format(format!("missing header: {k}")))
        };
        let h = mu[1] - mu[0];
        for w in mu.windows(2) {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0) {
                return Err(Error::format("non-uniform node spacing".to_string()));
            }
        }
        Ok(ProfileSolution {
            s: get("s")?,
            k: get("k")?,
            m: get("M")?,
            table: UniformTable1::new(mu[0], h, phi, phi1, phi2),
            tail: TailModel {
                a_plus: get("tail_A_plus")?,
                a_minus: get("tail_A_minus")?,
                b_plus: get("tail_B_plus")?,
                b_minus: get("tail_B_minus")?,
            },
        })
    }
}
