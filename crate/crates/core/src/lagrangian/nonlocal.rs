//! The nonlocal operators `P` and `Q` and the right-hand side of the
//! Lagrangian system.
//!
//! Both operators are convolutions of the source `U^2 y_xi + H_xi` against
//! `exp(-|y(xi) - y(eta)|)`. Each cell carries the weight `w_c` of the source
//! (trapezoid in `U^2`) spread uniformly over `[y_c, y_{c+1}]`, and the kernel
//! is integrated exactly over the cell. Seen from a node outside the cell that
//! is `w_c phi(dy_c) exp(-dist to the near end)` with `phi(d) = (1 - e^{-d}) / d`,
//! so both sums reduce to two O(N) sweeps:
//!
//! ```text
//! A_i = exp(-(y_i - y_{i-1})) A_{i-1} + phi(dy_{i-1}) w_{i-1}   (cells left of i)
//! B_i = exp(-(y_{i+1} - y_i)) B_{i+1} + phi(dy_i) w_i           (cells right of i)
//! P_i = (A_i + B_i) / 4,   Q_i = -(A_i - B_i) / 4
//! ```
//!
//! Treating the kernel cell by cell keeps the sign jump of the `Q` kernel on a
//! cell boundary, so `Q` stays accurate at nodes where the source jumps (peakon
//! crests). The sweeps are exact for any `y` with `y_{i+1} >= y_i`; slightly
//! negative steps are accepted with the same formula.

use super::grid::forward_diff;
use super::state::{LagrangianState, Tangent};
use crate::error::{Error, Result};

/// Most negative cell slope of `y` accepted by the kernel splitting. Slightly
/// negative slopes appear at the discretization level when characteristics
/// collide; anything below this is a genuine fold.
pub const Y_SLOPE_FLOOR: f64 = -1e-3;

/// Rejects states whose `y` decreases in some cell beyond [`Y_SLOPE_FLOOR`].
pub fn check_y_monotone(x: &LagrangianState) -> Result<()> {
    let h = x.grid.h();
    for c in 0..x.n() - 1 {
        let slope = (x.y_at(c + 1) - x.y_at(c)) / h;
        if slope < Y_SLOPE_FLOOR {
            return Err(Error::NonMonotone { cell: c, slope });
        }
    }
    Ok(())
}

/// Cell weights `h * (avg(U^2) y_xi + H_xi)` of the CH source.
pub fn ch_cell_weights(x: &LagrangianState) -> Vec<f64> {
    let y = x.y();
    let u = &x.u_lag;
    let hh = &x.h_cum;
    (0..x.n() - 1)
        .map(|c| {
            let u2 = 0.5 * (u[c] * u[c] + u[c + 1] * u[c + 1]);
            u2 * (y[c + 1] - y[c]) + (hh[c + 1] - hh[c])
        })
        .collect()
}

/// `(1 - e^{-d}) / d`, the mean of `e^{-s}` over `[0, d]`.
#[inline]
pub fn cell_average_factor(d: f64) -> f64 {
    if d.abs() < 1e-8 {
        1.0 - 0.5 * d
    } else {
        -(-d).exp_m1() / d
    }
}

/// Left and right sums `(A_i, B_i)` for cell weights on the nodes `y`.
pub fn kernel_sweeps(y: &[f64], weights: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = y.len();
    debug_assert_eq!(weights.len() + 1, n);
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let decay: Vec<f64> = dy.iter().map(|d| (-d).exp()).collect();
    let lumped: Vec<f64> = dy
        .iter()
        .zip(weights)
        .map(|(&d, &w)| cell_average_factor(d) * w)
        .collect();
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    for i in 1..n {
        a[i] = decay[i - 1] * a[i - 1] + lumped[i - 1];
    }
    for i in (0..n - 1).rev() {
        b[i] = decay[i] * b[i + 1] + lumped[i];
    }
    (a, b)
}

/// `P` and `Q` on the nodes `y` from cell weights, kernel prefactor `scale`.
pub fn convolve_pq(y: &[f64], weights: &[f64], scale: f64) -> (Vec<f64>, Vec<f64>) {
    let (a, b) = kernel_sweeps(y, weights);
    let p = (0..y.len()).map(|i| scale * (a[i] + b[i])).collect();
    let q = (0..y.len()).map(|i| -scale * (a[i] - b[i])).collect();
    (p, q)
}

/// Both operators in one pass.
pub fn eval_pq(x: &LagrangianState) -> Result<(Vec<f64>, Vec<f64>)> {
    check_y_monotone(x)?;
    Ok(convolve_pq(&x.y(), &ch_cell_weights(x), 0.25))
}

pub fn eval_p(x: &LagrangianState) -> Result<Vec<f64>> {
    eval_pq(x).map(|(p, _)| p)
}

pub fn eval_q(x: &LagrangianState) -> Result<Vec<f64>> {
    eval_pq(x).map(|(_, q)| q)
}

/// Reference O(N^2) evaluation of the same quadrature: every cell is summed
/// against every node directly.
pub fn direct_pq(y: &[f64], weights: &[f64], scale: f64) -> (Vec<f64>, Vec<f64>) {
    let n = y.len();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let lumps: Vec<f64> = weights
        .iter()
        .enumerate()
        .map(|(c, &w)| cell_average_factor(y[c + 1] - y[c]) * w)
        .collect();
    for i in 0..n {
        let (mut sp, mut sq) = (0.0, 0.0);
        for (c, &lump) in lumps.iter().enumerate() {
            if c < i {
                let k = (-(y[i] - y[c + 1])).exp() * lump;
                sp += k;
                sq += k;
            } else {
                let k = (-(y[c] - y[i])).exp() * lump;
                sp += k;
                sq -= k;
            }
        }
        p[i] = scale * sp;
        q[i] = -scale * sq;
    }
    (p, q)
}

/// Right-hand side `(U, -Q, U^3 - 2 P U)` of the semilinear system.
pub fn rhs(x: &LagrangianState) -> Result<Tangent> {
    let (p, q) = eval_pq(x)?;
    let u = &x.u_lag;
    Ok(Tangent {
        d_zeta: u.clone(),
        d_u: q.iter().map(|v| -v).collect(),
        d_h: u
            .iter()
            .zip(&p)
            .map(|(&ui, &pi)| ui * ui * ui - 2.0 * pi * ui)
            .collect(),
    })
}

/// Forward differences of `P` and `Q y_xi` per cell; used to check `P_x(y) = Q`.
pub fn derivative_identity_gap(x: &LagrangianState) -> Result<f64> {
    let (p, q) = eval_pq(x)?;
    let h = x.grid.h();
    let dp = forward_diff(&p, h);
    let yx = forward_diff(&x.y(), h);
    Ok((0..dp.len())
        .map(|c| (dp[c] - 0.5 * (q[c] + q[c + 1]) * yx[c]).abs())
        .fold(0.0, f64::max))
}
