use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lagrangian::{Grid, LagrangianState};

/// A monotone relabeling sampled on a grid, stored as the offset `f - id`.
/// Outside the window the offset is continued by its end values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relabeling {
    pub grid: Grid,
    offset: Vec<f64>,
}

impl Relabeling {
    pub fn identity(grid: Grid) -> Self {
        Self {
            grid,
            offset: vec![0.0; grid.n()],
        }
    }

    /// From samples `f(xi_i)`.
    pub fn new(grid: Grid, f: &[f64]) -> Result<Self> {
        if f.len() != grid.n() {
            return Err(Error::LengthMismatch {
                what: "relabeling",
                expected: grid.n(),
                got: f.len(),
            });
        }
        let offset = f
            .iter()
            .enumerate()
            .map(|(i, v)| v - grid.node(i))
            .collect();
        Self::from_offset(grid, offset)
    }

    pub fn from_offset(grid: Grid, offset: Vec<f64>) -> Result<Self> {
        let r = Self { grid, offset };
        r.validate()?;
        Ok(r)
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let offset = grid.nodes().into_iter().map(|xi| f(xi) - xi).collect();
        Self::from_offset(grid, offset)
    }

    pub fn validate(&self) -> Result<()> {
        if self.offset.len() != self.grid.n() {
            return Err(Error::LengthMismatch {
                what: "relabeling",
                expected: self.grid.n(),
                got: self.offset.len(),
            });
        }
        if self.offset.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("relabeling"));
        }
        let f = self.values();
        if let Some(c) = f.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidRelabeling(format!(
                "not strictly increasing in cell {c}"
            )));
        }
        Ok(())
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    /// `f(xi_i)`.
    pub fn values(&self) -> Vec<f64> {
        (0..self.grid.n())
            .map(|i| self.grid.node(i) + self.offset[i])
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.offset.iter().all(|&d| d == 0.0)
    }

    /// `f(x)` for any real `x`.
    pub fn eval(&self, x: f64) -> f64 {
        x + self.grid.interp(&self.offset, x).0
    }

    /// Cell slopes of `f`.
    pub fn slopes(&self) -> Vec<f64> {
        let h = self.grid.h();
        self.offset
            .windows(2)
            .map(|w| 1.0 + (w[1] - w[0]) / h)
            .collect()
    }

    /// Least `kappa` with every slope in `[1/(1+kappa), 1+kappa]` and
    /// `sup |f - id| <= kappa`.
    pub fn kappa(&self) -> f64 {
        let slope = self
            .slopes()
            .iter()
            .map(|&s| (s - 1.0).max(1.0 / s - 1.0))
            .fold(0.0, f64::max);
        let off = self.offset.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        slope.max(off)
    }

    /// `self o g`.
    pub fn compose(&self, g: &Relabeling) -> Result<Relabeling> {
        if !self.grid.same_as(&g.grid) {
            return Err(Error::GridMismatch);
        }
        let offset = g
            .values()
            .iter()
            .zip(&g.offset)
            .map(|(&gx, &dg)| dg + self.grid.interp(&self.offset, gx).0)
            .collect();
        Relabeling::from_offset(self.grid, offset)
    }

    /// Piecewise-linear inverse.
    pub fn invert(&self) -> Relabeling {
        let f = self.values();
        let n = self.grid.n();
        let (lo_off, hi_off) = (self.offset[0], self.offset[n - 1]);
        let offset = (0..n)
            .map(|i| {
                let xi = self.grid.node(i);
                let pre = if xi <= f[0] {
                    xi - lo_off
                } else if xi >= f[n - 1] {
                    xi - hi_off
                } else {
                    let k = f.partition_point(|&v| v <= xi) - 1;
                    let theta = (xi - f[k]) / (f[k + 1] - f[k]);
                    self.grid.node(k) + theta * self.grid.h()
                };
                pre - xi
            })
            .collect();
        Relabeling {
            grid: self.grid,
            offset,
        }
    }
}

/// Least `kappa` of a relabeling; see [`Relabeling::kappa`].
pub fn kappa_of(f: &Relabeling) -> Result<f64> {
    f.validate()?;
    Ok(f.kappa())
}

pub fn compose(f: &Relabeling, g: &Relabeling) -> Result<Relabeling> {
    f.compose(g)
}

pub fn invert(f: &Relabeling) -> Relabeling {
    f.invert()
}

/// `X o f` together with a flag set when some `f(xi_i)` left the window and
/// the end values were used.
pub fn relabel_flagged(x: &LagrangianState, f: &Relabeling) -> Result<(LagrangianState, bool)> {
    if !x.grid.same_as(&f.grid) {
        return Err(Error::GridMismatch);
    }
    let n = x.n();
    let mut clamped = false;
    let mut zeta = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut hh = Vec::with_capacity(n);
    for i in 0..n {
        let d = f.offset[i];
        let fx = x.grid.node(i) + d;
        let (z, out) = x.grid.interp(&x.zeta, fx);
        clamped |= out;
        zeta.push(z + d);
        u.push(x.grid.interp(&x.u_lag, fx).0);
        hh.push(x.grid.interp(&x.h_cum, fx).0);
    }
    Ok((
        LagrangianState {
            grid: x.grid,
            zeta,
            u_lag: u,
            h_cum: hh,
        },
        clamped,
    ))
}

/// `X o f = (y o f, U o f, H o f)`.
pub fn relabel(x: &LagrangianState, f: &Relabeling) -> Result<LagrangianState> {
    relabel_flagged(x, f).map(|(s, _)| s)
}

/// The relabeling `y + H` of a state, if it is strictly increasing.
pub fn label_map(x: &LagrangianState) -> Result<Relabeling> {
    let offset: Vec<f64> = x.zeta.iter().zip(&x.h_cum).map(|(z, h)| z + h).collect();
    let r = Relabeling {
        grid: x.grid,
        offset,
    };
    let f = r.values();
    if let Some(c) = f.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::NotInF(c));
    }
    Ok(r)
}

/// `Pi(X) = X o (y + H)^{-1}`: the relabeled version of `X` with `y + H = id`.
/// The output satisfies `zeta = -H` at every node.
pub fn project_pi(x: &LagrangianState) -> Result<LagrangianState> {
    let hmap = label_map(x)?.values();
    let n = x.n();
    let last = n - 1;
    let mut u = Vec::with_capacity(n);
    let mut hh = Vec::with_capacity(n);
    for i in 0..n {
        let xi = x.grid.node(i);
        if xi <= hmap[0] {
            // outside the window X is continued by its end values
            u.push(x.u_lag[0]);
            hh.push(x.h_cum[0]);
        } else if xi >= hmap[last] {
            u.push(x.u_lag[last]);
            hh.push(x.h_cum[last]);
        } else {
            let k = hmap.partition_point(|&v| v <= xi) - 1;
            let theta = (xi - hmap[k]) / (hmap[k + 1] - hmap[k]);
            u.push(x.u_lag[k] + theta * (x.u_lag[k + 1] - x.u_lag[k]));
            hh.push(x.h_cum[k] + theta * (x.h_cum[k + 1] - x.h_cum[k]));
        }
    }
    Ok(LagrangianState {
        grid: x.grid,
        zeta: hh.iter().map(|v| -v).collect(),
        u_lag: u,
        h_cum: hh,
    })
}

/// `max_i |y_i + H_i - xi_i|`.
pub fn f0_defect(x: &LagrangianState) -> f64 {
    (0..x.n())
        .map(|i| (x.zeta[i] + x.h_cum[i]).abs())
        .fold(0.0, f64::max)
}
