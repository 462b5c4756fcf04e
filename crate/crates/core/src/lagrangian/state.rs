use serde::{Deserialize, Serialize};

use super::grid::{forward_diff, trapezoid, Grid};
use crate::error::{Error, Result};

/// Grid-sampled Lagrangian triple `(zeta, U, H)` with `y = xi + zeta`.
///
/// Outside the window the state is extended by its end values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagrangianState {
    pub grid: Grid,
    pub zeta: Vec<f64>,
    #[serde(rename = "u")]
    pub u_lag: Vec<f64>,
    #[serde(rename = "h")]
    pub h_cum: Vec<f64>,
}

/// Time derivative of a [`LagrangianState`].
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent {
    pub d_zeta: Vec<f64>,
    pub d_u: Vec<f64>,
    pub d_h: Vec<f64>,
}

impl Tangent {
    pub fn zeros(n: usize) -> Self {
        Self {
            d_zeta: vec![0.0; n],
            d_u: vec![0.0; n],
            d_h: vec![0.0; n],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.d_zeta
            .iter()
            .chain(&self.d_u)
            .chain(&self.d_h)
            .all(|v| v.is_finite())
    }
}

impl LagrangianState {
    pub fn new(grid: Grid, zeta: Vec<f64>, u_lag: Vec<f64>, h_cum: Vec<f64>) -> Result<Self> {
        let s = Self {
            grid,
            zeta,
            u_lag,
            h_cum,
        };
        s.check_shape()?;
        Ok(s)
    }

    pub fn zero(grid: Grid) -> Self {
        let n = grid.n();
        Self {
            grid,
            zeta: vec![0.0; n],
            u_lag: vec![0.0; n],
            h_cum: vec![0.0; n],
        }
    }

    /// Build from `y` samples instead of `zeta`.
    pub fn from_y(grid: Grid, y: &[f64], u_lag: Vec<f64>, h_cum: Vec<f64>) -> Result<Self> {
        let zeta = y
            .iter()
            .enumerate()
            .map(|(i, &yi)| yi - grid.node(i))
            .collect();
        Self::new(grid, zeta, u_lag, h_cum)
    }

    pub fn check_shape(&self) -> Result<()> {
        let n = self.grid.n();
        for (what, v) in [("zeta", &self.zeta), ("u", &self.u_lag), ("h", &self.h_cum)] {
            if v.len() != n {
                return Err(Error::LengthMismatch {
                    what,
                    expected: n,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(what));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.grid.n()
    }

    #[inline]
    pub fn y_at(&self, i: usize) -> f64 {
        self.grid.node(i) + self.zeta[i]
    }

    pub fn y(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.y_at(i)).collect()
    }

    /// Samples of `y + H`, the relabeling that maps the state to the F0 section.
    pub fn y_plus_h(&self) -> Vec<f64> {
        (0..self.n())
            .map(|i| self.y_at(i) + self.h_cum[i])
            .collect()
    }

    /// Total energy `H(xi_max) - H(xi_min)`.
    pub fn energy(&self) -> f64 {
        self.h_cum[self.n() - 1] - self.h_cum[0]
    }

    pub fn max_abs_u(&self) -> f64 {
        self.u_lag.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `self + dt * k`, used by the integrator.
    pub fn axpy(&self, dt: f64, k: &Tangent) -> Self {
        let add = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, d)| x + dt * d).collect();
        Self {
            grid: self.grid,
            zeta: add(&self.zeta, &k.d_zeta),
            u_lag: add(&self.u_lag, &k.d_u),
            h_cum: add(&self.h_cum, &k.d_h),
        }
    }

    /// Evaluate all components at label `xi` (piecewise linear, clamped outside).
    /// Returns `(y, U, H, outside)`.
    pub fn eval_at(&self, xi: f64) -> (f64, f64, f64, bool) {
        let (z, out) = self.grid.interp(&self.zeta, xi);
        let (u, _) = self.grid.interp(&self.u_lag, xi);
        let (hh, _) = self.grid.interp(&self.h_cum, xi);
        (xi + z, u, hh, out)
    }

    /// Resample onto another grid using the end-value extension.
    pub fn resample(&self, grid: &Grid) -> Self {
        let mut zeta = Vec::with_capacity(grid.n());
        let mut u = Vec::with_capacity(grid.n());
        let mut hh = Vec::with_capacity(grid.n());
        for xi in grid.nodes() {
            zeta.push(self.grid.interp(&self.zeta, xi).0);
            u.push(self.grid.interp(&self.u_lag, xi).0);
            hh.push(self.grid.interp(&self.h_cum, xi).0);
        }
        Self {
            grid: *grid,
            zeta,
            u_lag: u,
            h_cum: hh,
        }
    }

    /// Default membership tolerance `10 h (1 + ||X||)`.
    pub fn default_tol(&self) -> f64 {
        10.0 * self.grid.h() * (1.0 + e_norm(self))
    }
}

/// `||f||_V = ||f||_inf + ||f_xi||_L2` on a uniform grid.
pub fn v_norm(values: &[f64], h: f64) -> f64 {
    sup_norm(values) + deriv_l2(values, h)
}

/// `||U||_H1 = sqrt(||U||^2 + ||U_xi||^2)`.
pub fn h1_norm(values: &[f64], h: f64) -> f64 {
    let l2sq = trapezoid(&values.iter().map(|v| v * v).collect::<Vec<_>>(), h);
    let d = deriv_l2(values, h);
    (l2sq + d * d).sqrt()
}

pub fn sup_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// L2 norm of the forward-difference derivative (one value per cell).
pub fn deriv_l2(values: &[f64], h: f64) -> f64 {
    let s: f64 = values
        .windows(2)
        .map(|w| (w[1] - w[0]) * (w[1] - w[0]))
        .sum();
    (s / h).sqrt()
}

/// The E-norm `||zeta||_V + ||U||_H1 + ||H||_V`.
pub fn e_norm(x: &LagrangianState) -> f64 {
    e_norm_parts(x.grid.h(), &x.zeta, &x.u_lag, &x.h_cum)
}

pub fn e_norm_parts(h: f64, zeta: &[f64], u: &[f64], hh: &[f64]) -> f64 {
    v_norm(zeta, h) + h1_norm(u, h) + v_norm(hh, h)
}

/// E-norm of `a - b`; both states must share the grid.
pub fn e_distance(a: &LagrangianState, b: &LagrangianState) -> Result<f64> {
    if !a.grid.same_as(&b.grid) {
        return Err(Error::GridMismatch);
    }
    let d = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(x, y)| x - y).collect::<Vec<_>>();
    Ok(e_norm_parts(
        a.grid.h(),
        &d(&a.zeta, &b.zeta),
        &d(&a.u_lag, &b.u_lag),
        &d(&a.h_cum, &b.h_cum),
    ))
}

/// Per-cell discrete derivatives and the compatibility defect.
#[derive(Debug, Clone)]
pub struct CellData {
    pub y_xi: Vec<f64>,
    pub u_xi: Vec<f64>,
    pub h_xi: Vec<f64>,
    /// Cell average of `U^2` (trapezoid).
    pub u2_avg: Vec<f64>,
}

impl CellData {
    pub fn of(x: &LagrangianState) -> Self {
        let h = x.grid.h();
        let y = x.y();
        let u2_avg = x
            .u_lag
            .windows(2)
            .map(|w| 0.5 * (w[0] * w[0] + w[1] * w[1]))
            .collect();
        Self {
            y_xi: forward_diff(&y, h),
            u_xi: forward_diff(&x.u_lag, h),
            h_xi: forward_diff(&x.h_cum, h),
            u2_avg,
        }
    }

    /// Pointwise defect `y_xi H_xi - y_xi^2 U^2 - U_xi^2` of cell `c`.
    #[inline]
    pub fn defect(&self, c: usize) -> f64 {
        let yx = self.y_xi[c];
        yx * self.h_xi[c] - yx * yx * self.u2_avg[c] - self.u_xi[c] * self.u_xi[c]
    }
}

/// Outcome of checking a state against the constraints of the Lagrangian set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipReport {
    pub tol: f64,
    /// `y_xi >= -tol` in every cell.
    pub y_monotone: bool,
    /// `H_xi >= -tol` in every cell.
    pub h_monotone: bool,
    /// `y_xi + H_xi > 0` in every cell.
    pub sum_positive: bool,
    /// `|H(xi_min)| <= tol`.
    pub h_left_vanishes: bool,
    /// Worst cell-integrated compatibility residual `<= tol`.
    pub compatible: bool,
    pub min_y_xi: f64,
    pub min_h_xi: f64,
    pub min_sum: f64,
    pub h_left: f64,
    /// Largest `h * |y_xi H_xi - y_xi^2 U^2 - U_xi^2|` over cells.
    pub max_cell_residual: f64,
    /// Largest pointwise defect (not scaled by the cell width).
    pub max_pointwise_residual: f64,
    pub worst_cell: usize,
}

impl MembershipReport {
    pub fn pass(&self) -> bool {
        self.y_monotone
            && self.h_monotone
            && self.sum_positive
            && self.h_left_vanishes
            && self.compatible
    }
}

/// Check the sign constraints, the left limit of `H` and the compatibility
/// relation. A kink of `U` inside a cell leaves an O(1) pointwise defect on a
/// set of width `h`, so the compatibility test uses the cell-integrated defect.
pub fn check_membership(x: &LagrangianState, tol: f64) -> MembershipReport {
    let h = x.grid.h();
    let cells = CellData::of(x);
    let mut min_y_xi = f64::INFINITY;
    let mut min_h_xi = f64::INFINITY;
    let mut min_sum = f64::INFINITY;
    let mut max_pt = 0.0_f64;
    let mut worst_cell = 0;
    for c in 0..x.n() - 1 {
        min_y_xi = min_y_xi.min(cells.y_xi[c]);
        min_h_xi = min_h_xi.min(cells.h_xi[c]);
        min_sum = min_sum.min(cells.y_xi[c] + cells.h_xi[c]);
        let r = cells.defect(c).abs();
        if r > max_pt {
            max_pt = r;
            worst_cell = c;
        }
    }
    let max_cell = h * max_pt;
    let h_left = x.h_cum[0];
    MembershipReport {
        tol,
        y_monotone: min_y_xi >= -tol,
        h_monotone: min_h_xi >= -tol,
        sum_positive: min_sum > 0.0,
        h_left_vanishes: h_left.abs() <= tol,
        compatible: max_cell <= tol,
        min_y_xi,
        min_h_xi,
        min_sum,
        h_left,
        max_cell_residual: max_cell,
        max_pointwise_residual: max_pt,
        worst_cell,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(-5.0, 5.0, 201).unwrap()
    }

    #[test]
    fn zero_state_has_zero_norm_and_passes() {
        let x = LagrangianState::zero(grid());
        assert_eq!(e_norm(&x), 0.0);
        let r = check_membership(&x, 1e-12);
        assert!(r.pass());
        assert_eq!(r.max_cell_residual, 0.0);
    }

    #[test]
    fn constant_h_norm_is_the_constant() {
        let g = grid();
        let x = LagrangianState::new(g, vec![0.0; 201], vec![0.0; 201], vec![0.7; 201]).unwrap();
        assert!((e_norm(&x) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn decreasing_h_is_flagged() {
        let g = grid();
        let mut hh: Vec<f64> = (0..201).map(|i| i as f64 * 0.01).collect();
        hh[100] = hh[99] - 0.5;
        let x = LagrangianState::new(g, vec![0.0; 201], vec![0.0; 201], hh).unwrap();
        let r = check_membership(&x, 1e-3);
        assert!(!r.h_monotone);
        assert!(!r.pass());
        assert!(r.min_h_xi < 0.0);
    }

    #[test]
    fn shape_errors() {
        let g = grid();
        assert!(matches!(
            LagrangianState::new(g, vec![0.0; 3], vec![0.0; 201], vec![0.0; 201]),
            Err(Error::LengthMismatch { .. })
        ));
        let mut u = vec![0.0; 201];
        u[4] = f64::NAN;
        assert!(matches!(
            LagrangianState::new(g, vec![0.0; 201], u, vec![0.0; 201]),
            Err(Error::NonFinite("u"))
        ));
    }

    #[test]
    fn resample_onto_same_grid_is_identity() {
        let g = grid();
        let zeta: Vec<f64> = g.nodes().iter().map(|x| -0.1 * (1.0 + x.tanh())).collect();
        let u: Vec<f64> = g.nodes().iter().map(|x| (-x * x).exp()).collect();
        let hh: Vec<f64> = zeta.iter().map(|z| -z).collect();
        let x = LagrangianState::new(g, zeta, u, hh).unwrap();
        assert_eq!(x.resample(&g), x);
    }
}
