//! Dense scalar fields on uniform boxes in ℝ³.

use serde::{Deserialize, Serialize};

/// Uniform cell-centered grid on the box `[-Lx/2, Lx/2] × … × [-Lz/2, Lz/2]`.
///
/// Node `i` along an axis of extent `L` with `n` cells sits at
/// `-L/2 + (i + 1/2) · L/n`, so the node set is symmetric under reflection
/// through the origin (and under the dihedral symmetries of the box when the
/// extents agree), which the symmetry-reduced tabulations rely on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid3 {
    /// Cells along x, y, z.
    pub n: [usize; 3],
    /// Half-lengths of the box along x, y, z.
    pub half: [f64; 3],
}

impl Grid3 {
    /// Creates a grid, validating extents.
    pub fn new(n: [usize; 3], half: [f64; 3]) -> Self {
        // Singleton axes are allowed so 1D/2D fields can embed in the box.
        assert!(n.iter().all(|&m| m >= 1), "grid needs at least 1 cell per axis");
        assert!(n.iter().any(|&m| m >= 2), "grid needs at least one extended axis");
        assert!(half.iter().all(|&h| h > 0.0), "grid half-lengths must be positive");
        Grid3 { n, half }
    }

    /// Cube grid: `n³` cells on `[-L/2, L/2]³`.
    pub fn cube(n: usize, box_len: f64) -> Self {
        Self::new([n, n, n], [box_len / 2.0; 3])
    }

    /// Grid spacing along `axis`.
    #[inline]
    pub fn h(&self, axis: usize) -> f64 {
        2.0 * self.half[axis] / self.n[axis] as f64
    }

    /// Coordinate of node `i` along `axis`.
    #[inline]
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        -self.half[axis] + (i as f64 + 0.5) * self.h(axis)
    }

    /// Total number of nodes.
    #[inline]
    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    /// True when the grid holds no nodes (cannot happen for validated grids).
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of `(ix, iy, iz)`; `z` varies fastest (row-major over
    /// `[nx, ny, nz]`).
    #[inline]
    pub fn idx(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n[1] + iy) * self.n[2] + iz
    }

    /// Inverse of [`Grid3::idx`].
    #[inline]
    pub fn unidx(&self, idx: usize) -> (usize, usize, usize) {
        let iz = idx % self.n[2];
        let r = idx / self.n[2];
        let iy = r % self.n[1];
        let ix = r / self.n[1];
        (ix, iy, iz)
    }

    /// Coordinates of the node with flat index `idx`.
    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let (ix, iy, iz) = self.unidx(idx);
        [self.coord(0, ix), self.coord(1, iy), self.coord(2, iz)]
    }
}

/// Scalar field sampled on a [`Grid3`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field3 {
    /// The grid the samples live on.
    pub grid: Grid3,
    /// Row-major samples (`z` fastest), length `grid.len()`.
    pub data: Vec<f64>,
}

impl Field3 {
    /// Constant field.
    pub fn constant(grid: Grid3, value: f64) -> Self {
        Field3 { grid, data: vec![value; grid.len()] }
    }

    /// Field from a pointwise function of the node coordinates.
    pub fn from_fn(grid: Grid3, mut f: impl FnMut(f64, f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for ix in 0..grid.n[0] {
            let x = grid.coord(0, ix);
            for iy in 0..grid.n[1] {
                let y = grid.coord(1, iy);
                for iz in 0..grid.n[2] {
                    data.push(f(x, y, grid.coord(2, iz)));
                }
            }
        }
        Field3 { grid, data }
    }

    /// Wraps existing samples.
    pub fn from_data(grid: Grid3, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), grid.len(), "field buffer does not match grid");
        Field3 { grid, data }
    }

    /// Value at `(ix, iy, iz)`.
    #[inline]
    pub fn at(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        self.data[self.grid.idx(ix, iy, iz)]
    }

    /// Mutable value at `(ix, iy, iz)`.
    #[inline]
    pub fn at_mut(&mut self, ix: usize, iy: usize, iz: usize) -> &mut f64 {
        &mut self.data[self.grid.idx(ix, iy, iz)]
    }

    /// Max-norm of the samples.
    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    }

    /// Max-norm of the difference with another field on the same grid.
    pub fn dist_inf(&self, other: &Field3) -> f64 {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (&a, &b)| m.max((a - b).abs()))
    }

    /// Pointwise minimum of `self - other` (signed ordering margin).
    pub fn min_diff(&self, other: &Field3) -> f64 {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        self.data
            .iter()
            .zip(&other.data)
            .fold(f64::INFINITY, |m, (&a, &b)| m.min(a - b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_symmetric_about_origin() {
        let g = Grid3::cube(48, 24.0);
        assert_eq!(g.h(0), 0.5);
        for i in 0..48 {
            let a = g.coord(0, i);
            let b = g.coord(0, 47 - i);
            assert!((a + b).abs() < 1e-14, "nodes {a} and {b} not mirrored");
        }
        // Cell-centered: no node exactly at ±L/2.
        assert!((g.coord(0, 0) + 11.75).abs() < 1e-14);
    }

    #[test]
    fn index_round_trip() {
        let g = Grid3::new([4, 5, 6], [1.0, 2.0, 3.0]);
        for idx in 0..g.len() {
            let (ix, iy, iz) = g.unidx(idx);
            assert_eq!(g.idx(ix, iy, iz), idx);
        }
    }

    #[test]
    fn from_fn_matches_at() {
        let g = Grid3::cube(6, 3.0);
        let f = Field3::from_fn(g, |x, y, z| x + 10.0 * y + 100.0 * z);
        for ix in 0..6 {
            for iy in 0..6 {
                for iz in 0..6 {
                    let want = g.coord(0, ix) + 10.0 * g.coord(1, iy) + 100.0 * g.coord(2, iz);
                    assert_eq!(f.at(ix, iy, iz), want);
                }
            }
        }
    }
}
