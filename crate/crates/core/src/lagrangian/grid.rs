use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on a truncated interval of the Lagrangian label line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    xi_min: f64,
    h: f64,
    n: usize,
}

#[derive(Serialize, Deserialize)]
struct GridSpec {
    xi_min: f64,
    xi_max: f64,
    n: usize,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;
    fn try_from(s: GridSpec) -> Result<Self> {
        Grid::new(s.xi_min, s.xi_max, s.n)
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        GridSpec {
            xi_min: g.xi_min,
            xi_max: g.xi_max(),
            n: g.n,
        }
    }
}

impl Grid {
    pub fn new(xi_min: f64, xi_max: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGrid(format!("need n >= 3, got {n}")));
        }
        if !(xi_min.is_finite() && xi_max.is_finite()) || xi_min >= xi_max {
            return Err(Error::InvalidGrid(format!(
                "need finite xi_min < xi_max, got [{xi_min}, {xi_max}]"
            )));
        }
        let h = (xi_max - xi_min) / (n - 1) as f64;
        Ok(Self { xi_min, h, n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn xi_min(&self) -> f64 {
        self.xi_min
    }

    /// Last node; may differ from the requested upper bound in the last ulp.
    #[inline]
    pub fn xi_max(&self) -> f64 {
        self.node(self.n - 1)
    }

    /// Node positions are always produced by this formula so that identity
    /// relabelings hit nodes bitwise.
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.xi_min + i as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Grid with the same window and `2n - 1` nodes (every old node kept).
    pub fn refined(&self) -> Grid {
        Grid::new(self.xi_min, self.xi_max(), 2 * self.n - 1).expect("refining a valid grid")
    }

    /// Cell index `k` and local coordinate `theta in [0, 1]` of `x`, clamped to the window.
    #[inline]
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let pos = (x - self.xi_min) / self.h;
        if pos <= 0.0 || pos.is_nan() {
            return (0, 0.0);
        }
        let last = self.n - 2;
        let k = pos.floor() as usize;
        if k > last {
            return (last, 1.0);
        }
        (k, pos - k as f64)
    }

    /// Piecewise-linear interpolation of nodal `values` at `x`, constant extension
    /// outside the window. Exact node hits return the stored value unchanged.
    /// The flag is true when `x` lies outside the window.
    pub fn interp(&self, values: &[f64], x: f64) -> (f64, bool) {
        debug_assert_eq!(values.len(), self.n);
        if x < self.xi_min {
            return (values[0], true);
        }
        if x > self.xi_max() {
            return (values[self.n - 1], true);
        }
        let (k, theta) = self.locate(x);
        if x == self.node(k) {
            return (values[k], false);
        }
        if x == self.node(k + 1) {
            return (values[k + 1], false);
        }
        (values[k] + theta * (values[k + 1] - values[k]), false)
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.n == other.n && self.xi_min == other.xi_min && self.h == other.h
    }
}

/// Forward differences `(v[i+1] - v[i]) / h`, one per cell.
pub fn forward_diff(values: &[f64], h: f64) -> Vec<f64> {
    values.windows(2).map(|w| (w[1] - w[0]) / h).collect()
}

/// Trapezoid rule for nodal samples on a uniform grid.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..n - 1].iter().sum();
    h * (inner + 0.5 * (values[0] + values[n - 1]))
}

/// Locate `x` in a strictly increasing (non-uniform) abscissa; returns the cell
/// index and local coordinate, clamped to the ends.
pub fn locate_sorted(xs: &[f64], x: f64) -> (usize, f64) {
    let n = xs.len();
    debug_assert!(n >= 2);
    if x <= xs[0] {
        return (0, 0.0);
    }
    if x >= xs[n - 1] {
        return (n - 2, 1.0);
    }
    let k = xs.partition_point(|&v| v <= x) - 1;
    let k = k.min(n - 2);
    let dx = xs[k + 1] - xs[k];
    let theta = if dx > 0.0 { (x - xs[k]) / dx } else { 0.0 };
    (k, theta)
}

/// Linear interpolation on a strictly increasing abscissa, constant extension.
pub fn interp_sorted(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let (k, theta) = locate_sorted(xs, x);
    if theta == 0.0 {
        return ys[k];
    }
    if theta == 1.0 {
        return ys[k + 1];
    }
    ys[k] + theta * (ys[k + 1] - ys[k])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid::new(0.0, 1.0, 2).is_err());
        assert!(Grid::new(1.0, 1.0, 10).is_err());
        assert!(Grid::new(0.0, f64::NAN, 10).is_err());
    }

    #[test]
    fn interp_hits_nodes_exactly() {
        let g = Grid::new(-3.3, 7.1, 101).unwrap();
        let v: Vec<f64> = g.nodes().iter().map(|x| (x * 1.7).sin()).collect();
        for i in 0..g.n() {
            let (val, out) = g.interp(&v, g.node(i));
            assert_eq!(val, v[i]);
            assert!(!out);
        }
        let (val, out) = g.interp(&v, 100.0);
        assert_eq!(val, v[100]);
        assert!(out);
    }

    #[test]
    fn refined_keeps_nodes() {
        let g = Grid::new(-1.0, 2.0, 31).unwrap();
        let r = g.refined();
        assert_eq!(r.n(), 61);
        for i in 0..g.n() {
            assert!((r.node(2 * i) - g.node(i)).abs() < 1e-14);
        }
    }

    #[test]
    fn trapezoid_integrates_linear_exactly() {
        let g = Grid::new(0.0, 2.0, 11).unwrap();
        let v: Vec<f64> = g.nodes().iter().map(|x| 3.0 * x + 1.0).collect();
        assert!((trapezoid(&v, g.h()) - 8.0).abs() < 1e-13);
    }

    #[test]
    fn sorted_interp_matches_linear() {
        let xs = [0.0, 0.5, 2.0, 2.1];
        let ys = [1.0, 2.0, 5.0, 0.0];
        assert_eq!(interp_sorted(&xs, &ys, -1.0), 1.0);
        assert!((interp_sorted(&xs, &ys, 1.25) - 3.5).abs() < 1e-14);
        assert_eq!(interp_sorted(&xs, &ys, 3.0), 0.0);
    }
}
