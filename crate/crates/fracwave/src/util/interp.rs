//! Hermite interpolation on uniform grids: 1-D tables carrying values with
//! one or two derivatives, and 2-D bicubic tables for fast surface lookup.

/// Cubic Hermite basis `H0, H1, G0, G1` at parameter `t ∈ [0,1]`:
/// `p(t) = y0 H0 + y1 H1 + h d0 G0 + h d1 G1`.
#[inline]
fn cubic_basis(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        2.0 * t3 - 3.0 * t2 + 1.0,
        -2.0 * t3 + 3.0 * t2,
        t3 - 2.0 * t2 + t,
        t3 - t2,
    ]
}

/// Derivatives (in `t`) of the cubic Hermite basis.
#[inline]
fn cubic_basis_d(t: f64) -> [f64; 4] {
    let t2 = t * t;
    [
        6.0 * t2 - 6.0 * t,
        -6.0 * t2 + 6.0 * t,
        3.0 * t2 - 4.0 * t + 1.0,
        3.0 * t2 - 2.0 * t,
    ]
}

/// Cubic Hermite interpolation on `[0, h]` with endpoint values and slopes.
#[inline]
pub fn hermite_cubic(h: f64, y0: f64, d0: f64, y1: f64, d1: f64, t: f64) -> f64 {
    let b = cubic_basis(t);
    y0 * b[0] + y1 * b[1] + h * (d0 * b[2] + d1 * b[3])
}

/// Derivative of [`hermite_cubic`] with respect to `x = t·h`.
#[inline]
pub fn hermite_cubic_d(h: f64, y0: f64, d0: f64, y1: f64, d1: f64, t: f64) -> f64 {
    let b = cubic_basis_d(t);
    (y0 * b[0] + y1 * b[1]) / h + d0 * b[2] + d1 * b[3]
}

/// Quintic Hermite interpolation on `[0, h]` matching endpoint values, first
/// and second derivatives. Exact for quintic polynomials; `O(h^6)` error for
/// smooth data.
#[inline]
pub fn hermite_quintic(
    h: f64,
    y0: f64,
    d0: f64,
    s0: f64,
    y1: f64,
    d1: f64,
    s1: f64,
    t: f64,
) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let a0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let a1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let a2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let b0 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let b1 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let b2 = 0.5 * (t3 - 2.0 * t4 + t5);
    y0 * a0 + h * d0 * a1 + h * h * s0 * a2 + y1 * b0 + h * d1 * b1 + h * h * s1 * b2
}

/// Uniform-grid table of a function with its first two derivatives.
///
/// Evaluation uses quintic Hermite for the value (`O(h^6)`), cubic Hermite on
/// `(d1, d2)` for the first derivative (`O(h^4)`), and a slope-synthesized
/// cubic for the second derivative (`O(h^3)`).
#[derive(Debug, Clone)]
pub struct UniformTable1 {
    /// Abscissa of the first node.
    pub x0: f64,
    /// Node spacing.
    pub h: f64,
    /// Function values at the nodes.
    pub y: Vec<f64>,
    /// First derivatives at the nodes.
    pub d1: Vec<f64>,
    /// Second derivatives at the nodes.
    pub d2: Vec<f64>,
}

impl UniformTable1 {
    /// Creates the table, checking array lengths agree.
    pub fn new(x0: f64, h: f64, y: Vec<f64>, d1: Vec<f64>, d2: Vec<f64>) -> Self {
        assert!(h > 0.0);
        assert!(y.len() >= 2 && y.len() == d1.len() && y.len() == d2.len());
        UniformTable1 { x0, h, y, d1, d2 }
    }

    /// Last abscissa covered by the table.
    pub fn x_max(&self) -> f64 {
        self.x0 + self.h * (self.y.len() - 1) as f64
    }

    /// Interpolated `(value, first, second)` at `x`, or `None` outside the
    /// covered range.
    pub fn eval(&self, x: f64) -> Option<(f64, f64, f64)> {
        if x < self.x0 || x > self.x_max() {
            return None;
        }
        let pos = (x - self.x0) / self.h;
        let mut i = pos.floor() as usize;
        if i >= self.y.len() - 1 {
            i = self.y.len() - 2;
        }
        let t = pos - i as f64;
        let value = hermite_quintic(
            self.h, self.y[i], self.d1[i], self.d2[i], self.y[i + 1], self.d1[i + 1],
            self.d2[i + 1], t,
        );
        let first = hermite_cubic(self.h, self.d1[i], self.d2[i], self.d1[i + 1], self.d2[i + 1], t);
        // Second derivative: cubic through d2 with centered-difference slopes.
        let n = self.y.len();
        let slope = |j: usize| -> f64 {
            if j == 0 {
                (self.d2[1] - self.d2[0]) / self.h
            } else if j == n - 1 {
                (self.d2[n - 1] - self.d2[n - 2]) / self.h
            } else {
                (self.d2[j + 1] - self.d2[j - 1]) / (2.0 * self.h)
            }
        };
        let second = hermite_cubic(self.h, self.d2[i], slope(i), self.d2[i + 1], slope(i + 1), t);
        Some((value, first, second))
    }
}

/// Row-major 2-D scalar grid (index `iy * nx + ix`).
#[derive(Debug, Clone)]
pub struct Grid2 {
    /// Number of columns (x-direction).
    pub nx: usize,
    /// Number of rows (y-direction).
    pub ny: usize,
    /// Values, row-major.
    pub v: Vec<f64>,
}

impl Grid2 {
    /// Creates a grid, checking the buffer length.
    pub fn new(nx: usize, ny: usize, v: Vec<f64>) -> Self {
        assert_eq!(v.len(), nx * ny);
        Grid2 { nx, ny, v }
    }

    #[inline]
    fn at(&self, ix: usize, iy: usize) -> f64 {
        self.v[iy * self.nx + ix]
    }
}

/// Bicubic Hermite table on a square-celled uniform 2-D grid.
///
/// Stores value and derivative grids `(f, f_x, f_y, f_xy)`; each cell is the
/// tensor-product cubic matching them at its four corners, so the surface is
/// globally `C^1`. With exact `f_x, f_y` grids the value error is `O(h^4)`
/// and the gradient error `O(h^3)` for smooth data.
#[derive(Debug, Clone)]
pub struct BicubicTable {
    /// Abscissa of the first column.
    pub x0: f64,
    /// Ordinate of the first row.
    pub y0: f64,
    /// Cell size (same in both directions).
    pub h: f64,
    f: Grid2,
    fx: Grid2,
    fy: Grid2,
    fxy: Grid2,
}

/// Fourth-order centered first derivative of a row-major grid along one axis,
/// with one-sided second-order stencils at the two boundary layers.
fn derive_grid(g: &Grid2, h: f64, along_x: bool) -> Grid2 {
    let (nx, ny) = (g.nx, g.ny);
    let mut out = vec![0.0; nx * ny];
    let n = if along_x { nx } else { ny };
    assert!(n >= 5, "derivative stencil needs at least 5 nodes");
    let get = |i: usize, j: usize| if along_x { g.at(i, j) } else { g.at(j, i) };
    for j in 0..(if along_x { ny } else { nx }) {
        for i in 0..n {
            let d = if i >= 2 && i + 2 < n {
                (get(i - 2, j) - 8.0 * get(i - 1, j) + 8.0 * get(i + 1, j) - get(i + 2, j))
                    / (12.0 * h)
            } else if i == 0 {
                (-3.0 * get(0, j) + 4.0 * get(1, j) - get(2, j)) / (2.0 * h)
            } else if i == 1 {
                (get(2, j) - get(0, j)) / (2.0 * h)
            } else if i == n - 2 {
                (get(n - 1, j) - get(n - 3, j)) / (2.0 * h)
            } else {
                (3.0 * get(n - 1, j) - 4.0 * get(n - 2, j) + get(n - 3, j)) / (2.0 * h)
            };
            let (ix, iy) = if along_x { (i, j) } else { (j, i) };
            out[iy * nx + ix] = d;
        }
    }
    Grid2::new(nx, ny, out)
}

impl BicubicTable {
    /// Builds a table from value and exact first-derivative grids; the cross
    /// derivative is synthesized by differencing `f_x` along `y`.
    pub fn from_grids(x0: f64, y0: f64, h: f64, f: Grid2, fx: Grid2, fy: Grid2) -> Self {
        assert_eq!(f.nx, fx.nx);
        assert_eq!(f.ny, fy.ny);
        let fxy = derive_grid(&fx, h, false);
        BicubicTable { x0, y0, h, f, fx, fy, fxy }
    }

    /// Builds a table from values only, synthesizing all derivative grids by
    /// high-order finite differences.
    pub fn from_values(x0: f64, y0: f64, h: f64, f: Grid2) -> Self {
        let fx = derive_grid(&f, h, true);
        let fy = derive_grid(&f, h, false);
        let fxy = derive_grid(&fx, h, false);
        BicubicTable { x0, y0, h, f, fx, fy, fxy }
    }

    /// Largest covered abscissa/ordinate.
    pub fn upper(&self) -> (f64, f64) {
        (
            self.x0 + self.h * (self.f.nx - 1) as f64,
            self.y0 + self.h * (self.f.ny - 1) as f64,
        )
    }

    /// True if `(x, y)` lies inside the covered rectangle.
    pub fn covers(&self, x: f64, y: f64) -> bool {
        let (xm, ym) = self.upper();
        x >= self.x0 && x <= xm && y >= self.y0 && y <= ym
    }

    /// Interpolated `(f, f_x, f_y)` at `(x, y)`. Panics outside the table;
    /// callers switch to the analytic far-field first.
    pub fn eval(&self, x: f64, y: f64) -> (f64, f64, f64) {
        assert!(self.covers(x, y), "bicubic table queried at ({x}, {y}) outside coverage");
        let px = (x - self.x0) / self.h;
        let py = (y - self.y0) / self.h;
        let mut ix = px.floor() as usize;
        let mut iy = py.floor() as usize;
        ix = ix.min(self.f.nx - 2);
        iy = iy.min(self.f.ny - 2);
        let t = px - ix as f64;
        let u = py - iy as f64;
        let bt = cubic_basis(t);
        let bu = cubic_basis(u);
        let dt = cubic_basis_d(t);
        let du = cubic_basis_d(u);
        let h = self.h;

        let mut val = 0.0;
        let mut gx = 0.0;
        let mut gy = 0.0;
        for a in 0..2usize {
            for b in 0..2usize {
                let (i, j) = (ix + a, iy + b);
                let (f, fx, fy, fxy) =
                    (self.f.at(i, j), self.fx.at(i, j), self.fy.at(i, j), self.fxy.at(i, j));
                // Basis index layout: [H0, H1, G0, G1] along each axis.
                let (hx, gxb) = (bt[a], bt[2 + a]);
                let (hy, gyb) = (bu[b], bu[2 + b]);
                let (dhx, dgx) = (dt[a], dt[2 + a]);
                let (dhy, dgy) = (du[b], du[2 + b]);
                val += f * hx * hy + h * fx * gxb * hy + h * fy * hx * gyb + h * h * fxy * gxb * gyb;
                gx += (f * dhx * hy + h * fy * dhx * gyb) / h + fx * dgx * hy + h * fxy * dgx * gyb;
                gy += (f * hx * dhy + h * fx * gxb * dhy) / h + fy * hx * dgy + h * fxy * gxb * dgy;
            }
        }
        (val, gx, gy)
    }

    /// Interpolated value only (same stencil as [`BicubicTable::eval`]).
    pub fn eval_value(&self, x: f64, y: f64) -> f64 {
        self.eval(x, y).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quintic_reproduces_quintic_polynomial() {
        let p = |x: f64| 1.0 + x - 2.0 * x.powi(3) + 0.5 * x.powi(5);
        let d = |x: f64| 1.0 - 6.0 * x.powi(2) + 2.5 * x.powi(4);
        let s = |x: f64| -12.0 * x + 10.0 * x.powi(3);
        let h = 0.7;
        for t in [0.0, 0.2, 0.5, 0.83, 1.0] {
            let x = t * h;
            let got = hermite_quintic(h, p(0.0), d(0.0), s(0.0), p(h), d(h), s(h), t);
            assert!((got - p(x)).abs() < 1e-13, "t={t}: {got} vs {}", p(x));
        }
    }

    #[test]
    fn table_interpolates_sine_accurately() {
        let h = 0.05;
        let n = 201;
        let x0 = -5.0;
        let y: Vec<f64> = (0..n).map(|i| (x0 + h * i as f64).sin()).collect();
        let d1: Vec<f64> = (0..n).map(|i| (x0 + h * i as f64).cos()).collect();
        let d2: Vec<f64> = (0..n).map(|i| -(x0 + h * i as f64).sin()).collect();
        let tab = UniformTable1::new(x0, h, y, d1, d2);
        let mut worst = (0.0_f64, 0.0_f64, 0.0_f64);
        for k in 0..1000 {
            let x = -4.99 + 9.97 * (k as f64 / 999.0);
            let (v, p, pp) = tab.eval(x).unwrap();
            worst.0 = worst.0.max((v - x.sin()).abs());
            worst.1 = worst.1.max((p - x.cos()).abs());
            worst.2 = worst.2.max((pp + x.sin()).abs());
        }
        assert!(worst.0 < 1e-11, "value error {}", worst.0);
        assert!(worst.1 < 1e-7, "first derivative error {}", worst.1);
        assert!(worst.2 < 5e-4, "second derivative error {}", worst.2);
    }

    #[test]
    fn bicubic_reproduces_cubic_polynomial_exactly() {
        // p(x,y) = (x^3 - 2x)(y^3 + y) is bicubic, so the Hermite patch with
        // exact corner data must reproduce it to round-off.
        let px = |x: f64| x.powi(3) - 2.0 * x;
        let dpx = |x: f64| 3.0 * x * x - 2.0;
        let py = |y: f64| y.powi(3) + y;
        let dpy = |y: f64| 3.0 * y * y + 1.0;
        let (nx, ny, h) = (7, 6, 0.5);
        let mut f = vec![0.0; nx * ny];
        let mut fx = vec![0.0; nx * ny];
        let mut fy = vec![0.0; nx * ny];
        let mut fxy = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let (x, y) = (i as f64 * h, j as f64 * h);
                f[j * nx + i] = px(x) * py(y);
                fx[j * nx + i] = dpx(x) * py(y);
                fy[j * nx + i] = px(x) * dpy(y);
                fxy[j * nx + i] = dpx(x) * dpy(y);
            }
        }
        let tab = BicubicTable {
            x0: 0.0,
            y0: 0.0,
            h,
            f: Grid2::new(nx, ny, f),
            fx: Grid2::new(nx, ny, fx),
            fy: Grid2::new(nx, ny, fy),
            fxy: Grid2::new(nx, ny, fxy),
        };
        for (x, y) in [(0.13, 0.91), (1.7, 2.0), (2.99, 2.49), (0.0, 0.0)] {
            let (v, gx, gy) = tab.eval(x, y);
            assert!((v - px(x) * py(y)).abs() < 1e-12);
            assert!((gx - dpx(x) * py(y)).abs() < 1e-11);
            assert!((gy - px(x) * dpy(y)).abs() < 1e-11);
        }
    }

    #[test]
    fn bicubic_from_values_is_fourth_order() {
        let g = |x: f64, y: f64| (0.7 * x).sin() * (0.4 * y).cos();
        let build = |h: f64| {
            let n = (4.0 / h) as usize + 1;
            let mut f = vec![0.0; n * n];
            for j in 0..n {
                for i in 0..n {
                    f[j * n + i] = g(i as f64 * h, j as f64 * h);
                }
            }
            BicubicTable::from_values(0.0, 0.0, h, Grid2::new(n, n, f))
        };
        let err = |tab: &BicubicTable, h: f64| {
            let mut worst = 0.0_f64;
            for k in 0..200 {
                let x = 0.5 + 3.0 * (k as f64 / 199.0);
                let y = 0.5 + 3.0 * ((k * 7 % 200) as f64 / 199.0);
                let v = tab.eval_value(x, y);
                worst = worst.max((v - g(x, y)).abs());
            }
            let _ = h;
            worst
        };
        let e1 = err(&build(0.2), 0.2);
        let e2 = err(&build(0.1), 0.1);
        assert!(e1 < 1e-4, "coarse error {e1}");
        // Roughly 16x reduction per halving; allow slack.
        assert!(e2 < e1 / 8.0, "errors {e1} -> {e2} not ~4th order");
    }
}
