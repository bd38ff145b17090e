//! Exact pyramid geometry: facets, sectors, and edge distances.
//!
//! A pyramid here is the graph `{z = h(x, y)}` of the maximum of `N ≥ 3`
//! linear forms `h_j(x, y) = a_j x + b_j y` whose normal pairs `(a_j, b_j)`
//! all lie on the circle of radius `m* = √(c² − k²)/k` and wind once
//! counter-clockwise. The plane splits into closed sectors `Ω_j` where `h_j`
//! attains the maximum; adjacent sectors meet along rays from the origin
//! (the planar edge set `E`), and lifting those rays onto the graph gives
//! the spatial edge set `Γ`. Everything downstream — the mollified surface,
//! the sub-/super-solution pair, the edge-flatness study — consumes these
//! quantities, so the formulas here are exact and oracle-tested.

use crate::error::{Error, Result};
use crate::util::fmt::g17;
use std::io::{BufRead, Write};

/// Relative slack for closure-membership checks (the guards admit a hair of
/// rounding around sector boundaries, nothing more).
const MEMBERSHIP_SLACK: f64 = 1e-9;

/// A pyramid: speeds and facet normals.
#[derive(Debug, Clone, PartialEq)]
pub struct PyramidSpec {
    c: f64,
    k: f64,
    m_star: f64,
    normals: Vec<[f64; 2]>,
}

impl PyramidSpec {
    /// Validates and wraps an explicit normal list.
    ///
    /// Requirements: `c > k > 0`; at least three normals; every normal on
    /// the circle of radius `m* = √(c² − k²)/k`; consecutive pairs oriented
    /// counter-clockwise (`a_j b_{j+1} − a_{j+1} b_j > 0`, cyclically); all
    /// pairs distinct; and the angular gaps closing up to one full turn
    /// (ruling out star-polygon orderings that satisfy the local
    /// determinant test while winding twice).
    pub fn new(c: f64, k: f64, normals: Vec<[f64; 2]>) -> Result<Self> {
        if !(k > 0.0) {
            return Err(Error::invalid("k", k, "profile speed must be positive"));
        }
        if !(c > k) {
            return Err(Error::invalid("c", c, "wave speed must exceed the profile speed"));
        }
        if !c.is_finite() {
            return Err(Error::invalid("c", c, "wave speed must be finite"));
        }
        let n = normals.len();
        if n < 3 {
            return Err(Error::invalid(
                "N",
                n as f64,
                "a pyramid needs at least three facets",
            ));
        }
        let m_star = (c * c - k * k).sqrt() / k;
        for (j, nrm) in normals.iter().enumerate() {
            let r = nrm[0].hypot(nrm[1]);
            if !((r - m_star).abs() <= 1e-9 * m_star) {
                return Err(Error::pre(format!(
                    "normal {j} has radius {r}, want m* = {m_star}"
                )));
            }
        }
        for j in 0..n {
            for i in 0..j {
                if normals[i] == normals[j] {
                    return Err(Error::pre(format!("normals {i} and {j} coincide")));
                }
            }
        }
        let mut winding = 0.0;
        for j in 0..n {
            let [a0, b0] = normals[j];
            let [a1, b1] = normals[(j + 1) % n];
            let det = a0 * b1 - a1 * b0;
            if !(det > 0.0) {
                return Err(Error::pre(format!(
                    "normals {j} and {} are not counter-clockwise (det = {det})",
                    (j + 1) % n
                )));
            }
            // Gap in (0, π) is guaranteed by det > 0 on the common circle.
            let dot = a0 * a1 + b0 * b1;
            winding += det.atan2(dot);
        }
        if (winding - 2.0 * std::f64::consts::PI).abs() > 1e-9 {
            return Err(Error::pre(format!(
                "normals wind {winding} radians around the origin, want exactly one turn"
            )));
        }
        Ok(PyramidSpec { c, k, m_star, normals })
    }

    /// The regular `N`-gon pyramid: normals at angles `(2j+1)π/N`, radius
    /// `m*`. The offset places the square case (`N = 4`) in its diagonal
    /// normalization `h(x, y) = (m*/√2)(|x| + |y|)`.
    pub fn regular(n: usize, c: f64, k: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid(
                "N",
                n as f64,
                "a pyramid needs at least three facets",
            ));
        }
        if !(k > 0.0 && c > k) {
            return Err(Error::invalid("c", c, "need c > k > 0"));
        }
        let m_star = (c * c - k * k).sqrt() / k;
        let normals = (0..n)
            .map(|j| {
                let theta = (2 * j + 1) as f64 * std::f64::consts::PI / n as f64;
                [m_star * theta.cos(), m_star * theta.sin()]
            })
            .collect();
        PyramidSpec::new(c, k, normals)
    }

    /// Wave speed `c` (along the axis).
    pub fn c(&self) -> f64 {
        self.c
    }

    /// One-dimensional profile speed `k`.
    pub fn k(&self) -> f64 {
        self.k
    }

    /// Facet slope `m* = √(c² − k²)/k`.
    pub fn m_star(&self) -> f64 {
        self.m_star
    }

    /// Number of facets.
    pub fn len(&self) -> usize {
        self.normals.len()
    }

    /// Never true — construction requires three facets.
    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    /// The normal pair `(a_j, b_j)`.
    pub fn normal(&self, j: usize) -> [f64; 2] {
        self.normals[j]
    }

    /// One facet's linear form `h_j(x, y) = a_j x + b_j y`.
    pub fn h_j(&self, j: usize, x: f64, y: f64) -> f64 {
        self.normals[j][0] * x + self.normals[j][1] * y
    }

    /// The pyramid height `h = max_j h_j` (convex, 1-homogeneous, ≥ 0).
    pub fn h(&self, x: f64, y: f64) -> f64 {
        (0..self.len())
            .map(|j| self.h_j(j, x, y))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the facet attaining the maximum (lowest index on ties), so
    /// `(x, y)` lies in the closure of sector `Ω_j`.
    pub fn region_index(&self, x: f64, y: f64) -> usize {
        let mut best = 0;
        let mut top = self.h_j(0, x, y);
        for j in 1..self.len() {
            let v = self.h_j(j, x, y);
            if v > top {
                top = v;
                best = j;
            }
        }
        best
    }

    /// Euclidean norms of the normal jumps to the two angular neighbours,
    /// `(m_j⁺, m_j⁻) = (|n_j − n_{j+1}|, |n_j − n_{j−1}|)`.
    pub fn m_pm(&self, j: usize) -> (f64, f64) {
        let n = self.len();
        let [a, b] = self.normals[j];
        let [ap, bp] = self.normals[(j + 1) % n];
        let [am, bm] = self.normals[(j + n - 1) % n];
        ((a - ap).hypot(b - bp), (a - am).hypot(b - bm))
    }

    /// In-sector distances to the two neighbouring sectors,
    /// `λ_j^± = ((a_j − a_{j±1}) x + (b_j − b_{j±1}) y) / m_j^±`.
    ///
    /// Defined for `(x, y)` in the closure of `Ω_j` (enforced up to
    /// rounding slack); there each value is the exact Euclidean distance to
    /// `Ω_{j±1}`, and their minimum is the distance to `∂Ω_j`.
    pub fn lambda_pm(&self, j: usize, x: f64, y: f64) -> Result<(f64, f64)> {
        if j >= self.len() {
            return Err(Error::invalid("j", j as f64, "facet index out of range"));
        }
        let slack = MEMBERSHIP_SLACK * self.m_star * (1.0 + x.hypot(y));
        if self.h(x, y) - self.h_j(j, x, y) > slack {
            return Err(Error::pre(format!(
                "point ({x}, {y}) lies outside the closure of sector {j}"
            )));
        }
        Ok(self.lambda_pm_unchecked(j, x, y))
    }

    fn lambda_pm_unchecked(&self, j: usize, x: f64, y: f64) -> (f64, f64) {
        let n = self.len();
        let [a, b] = self.normals[j];
        let [ap, bp] = self.normals[(j + 1) % n];
        let [am, bm] = self.normals[(j + n - 1) % n];
        let (mp, mm) = self.m_pm(j);
        (((a - ap) * x + (b - bp) * y) / mp, ((a - am) * x + (b - bm) * y) / mm)
    }

    /// Distance to the planar edge set `E` (zero on `E`): locate the
    /// sector, then take the smaller of the two in-sector formulas.
    pub fn lambda(&self, x: f64, y: f64) -> f64 {
        let j = self.region_index(x, y);
        let (lp, lm) = self.lambda_pm_unchecked(j, x, y);
        lp.min(lm).max(0.0)
    }

    /// Derives the edge rays (planar and lifted).
    pub fn edge_set(&self) -> EdgeSet {
        EdgeSet::new(self)
    }

    /// Writes the header + CSV rows `a,b` (17 significant digits,
    /// bit-exact round trip via [`PyramidSpec::read_from`]).
    pub fn write_to(&self, w: &mut dyn Write) -> Result<()> {
        writeln!(w, "# c={}", g17(self.c))?;
        writeln!(w, "# k={}", g17(self.k))?;
        writeln!(w, "a,b")?;
        for nrm in &self.normals {
            writeln!(w, "{},{}", g17(nrm[0]), g17(nrm[1]))?;
        }
        Ok(())
    }

    /// Parses the representation produced by [`PyramidSpec::write_to`] and
    /// re-validates every invariant.
    pub fn read_from(r: &mut dyn BufRead) -> Result<Self> {
        let mut c = None;
        let mut k = None;
        let mut normals = Vec::new();
        let mut saw_columns = false;
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((key, val)) = rest.trim().split_once('=') {
                    let v: f64 = val
                        .trim()
                        .parse()
                        .map_err(|_| Error::format(format!("bad header number: {line}")))?;
                    match key.trim() {
                        "c" => c = Some(v),
                        "k" => k = Some(v),
                        _ => {}
                    }
                }
                continue;
            }
            if line == "a,b" {
                saw_columns = true;
                continue;
            }
            let (sa, sb) = line
                .split_once(',')
                .ok_or_else(|| Error::format(format!("short row: {line}")))?;
            let a: f64 = sa
                .trim()
                .parse()
                .map_err(|_| Error::format(format!("bad number in row: {line}")))?;
            let b: f64 = sb
                .trim()
                .parse()
                .map_err(|_| Error::format(format!("bad number in row: {line}")))?;
            normals.push([a, b]);
        }
        if !saw_columns {
            return Err(Error::format("missing column header row"));
        }
        let c = c.ok_or_else(|| Error::format("missing header c="))?;
        let k = k.ok_or_else(|| Error::format("missing header k="))?;
        PyramidSpec::new(c, k, normals)
    }
}

/// One edge of the pyramid: the shared ray of two adjacent sectors and its
/// lift onto the graph of `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeRay {
    /// Unit direction of the planar ray `∂Ω_j ∩ ∂Ω_{j+1}` (part of `E`).
    pub planar: [f64; 2],
    /// Unit direction of the lifted ray in `ℝ³` (part of `Γ`); its third
    /// component is positive because `h > 0` away from the origin.
    pub lifted: [f64; 3],
    /// The two facets meeting along this edge, `(j, j+1 mod N)`.
    pub facets: (usize, usize),
    /// Norm of the normal jump across the edge, `|n_j − n_{j+1}|`.
    pub normal_jump: f64,
}

/// All edges of a pyramid, with exact point-to-ray distance queries.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSet {
    rays: Vec<EdgeRay>,
}

impl EdgeSet {
    /// Derives the `N` edge rays of a valid spec. The ray between facets
    /// `j` and `j+1` solves `h_j = h_{j+1}` on the side where both forms
    /// are positive: direction `(b_{j+1} − b_j, a_j − a_{j+1})`, on which
    /// `h_j` evaluates to the (positive) orientation determinant.
    pub fn new(spec: &PyramidSpec) -> EdgeSet {
        let n = spec.len();
        let rays = (0..n)
            .map(|j| {
                let [a0, b0] = spec.normal(j);
                let [a1, b1] = spec.normal((j + 1) % n);
                let ux = b1 - b0;
                let uy = a0 - a1;
                let len = ux.hypot(uy);
                let planar = [ux / len, uy / len];
                let z = a0 * planar[0] + b0 * planar[1];
                let lift_len = (1.0 + z * z).sqrt();
                EdgeRay {
                    planar,
                    lifted: [planar[0] / lift_len, planar[1] / lift_len, z / lift_len],
                    facets: (j, (j + 1) % n),
                    normal_jump: len,
                }
            })
            .collect();
        EdgeSet { rays }
    }

    /// The edge rays in facet order.
    pub fn rays(&self) -> &[EdgeRay] {
        &self.rays
    }

    /// Distance from a planar point to `E` (minimum over the edge rays;
    /// each ray starts at the origin, so the projection is clamped).
    pub fn distance_planar(&self, x: f64, y: f64) -> f64 {
        self.rays
            .iter()
            .map(|ray| {
                let t = (x * ray.planar[0] + y * ray.planar[1]).max(0.0);
                (x - t * ray.planar[0]).hypot(y - t * ray.planar[1])
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance from a spatial point to the lifted edge set `Γ`.
    pub fn distance(&self, p: [f64; 3]) -> f64 {
        self.rays
            .iter()
            .map(|ray| {
                let u = ray.lifted;
                let t = (p[0] * u[0] + p[1] * u[1] + p[2] * u[2]).max(0.0);
                let d = [p[0] - t * u[0], p[1] - t * u[1], p[2] - t * u[2]];
                (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// For each point, whether it lies farther than `r` from the edge set `Γ`
/// (the complement of the `r`-neighbourhood of the edges — the region where
/// the wave is expected to look one-dimensional).
pub fn gamma_r_mask(spec: &PyramidSpec, points: &[[f64; 3]], r: f64) -> Result<Vec<bool>> {
    if !(r >= 0.0) {
        return Err(Error::invalid("R", r, "edge-distance threshold must be ≥ 0"));
    }
    let edges = spec.edge_set();
    Ok(points.iter().map(|&p| edges.distance(p) > r).collect())
}
