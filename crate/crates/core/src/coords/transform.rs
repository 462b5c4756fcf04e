//! The maps between Eulerian pairs and the normalized Lagrangian section
//! (`y + H = id`).

use super::measure::{Atom, EulerianPair};
use crate::error::Result;
use crate::lagrangian::{Grid, LagrangianState};

/// Breakpoints of `G(x) = x + mu((-inf, x))`, which is piecewise linear with
/// upward jumps at the atoms.
struct CumulativeLabel {
    knots: Vec<f64>,
    /// `G` at the knot (left limit; atoms at the knot excluded).
    g_left: Vec<f64>,
    /// Right limit (atom at the knot included).
    g_right: Vec<f64>,
    /// Slope `1 + density` on `(knot_k, knot_{k+1})`.
    slope: Vec<f64>,
}

impl CumulativeLabel {
    fn new(p: &EulerianPair) -> Self {
        let mut knots: Vec<f64> = Vec::with_capacity(p.n() + p.mu.atoms.len());
        let mut atom_at: Vec<f64> = Vec::with_capacity(knots.capacity());
        let mut slope = Vec::with_capacity(knots.capacity());
        let mut ai = 0;
        let atoms = &p.mu.atoms;
        for c in 0..p.n() {
            let xc = p.x[c];
            // atoms strictly inside the previous cell
            while ai < atoms.len() && atoms[ai].x < xc {
                knots.push(atoms[ai].x);
                atom_at.push(atoms[ai].mass);
                slope.push(1.0 + p.mu.density[c - 1]);
                ai += 1;
            }
            let mut m = 0.0;
            if ai < atoms.len() && atoms[ai].x == xc {
                m = atoms[ai].mass;
                ai += 1;
            }
            knots.push(xc);
            atom_at.push(m);
            slope.push(if c + 1 < p.n() {
                1.0 + p.mu.density[c]
            } else {
                1.0
            });
        }
        let k = knots.len();
        let mut g_left = vec![0.0; k];
        let mut g_right = vec![0.0; k];
        g_left[0] = knots[0];
        g_right[0] = g_left[0] + atom_at[0];
        for i in 1..k {
            g_left[i] = g_right[i - 1] + slope[i - 1] * (knots[i] - knots[i - 1]);
            g_right[i] = g_left[i] + atom_at[i];
        }
        Self {
            knots,
            g_left,
            g_right,
            slope,
        }
    }

    /// `sup { y : G(y) < xi }`.
    fn inverse(&self, xi: f64) -> f64 {
        if xi <= self.g_left[0] {
            return xi;
        }
        // last knot with G_left < xi
        let k = self.g_left.partition_point(|&g| g < xi) - 1;
        if xi <= self.g_right[k] {
            return self.knots[k];
        }
        let y = self.knots[k] + (xi - self.g_right[k]) / self.slope[k];
        match self.knots.get(k + 1) {
            Some(&next) => y.min(next),
            None => y,
        }
    }

    fn total(&self) -> f64 {
        *self.g_right.last().unwrap() - *self.knots.last().unwrap()
    }
}

/// The map `L` on the default label window `[x_0, x_last + mu(R)]` with `n` nodes.
pub fn to_lagrangian(p: &EulerianPair, n: usize) -> Result<LagrangianState> {
    let grid = default_label_grid(p, n)?;
    Ok(to_lagrangian_on(p, &grid))
}

pub fn default_label_grid(p: &EulerianPair, n: usize) -> Result<Grid> {
    Grid::new(p.x[0], p.x[p.n() - 1] + p.energy(), n)
}

/// The map `L` sampled on an arbitrary label grid:
/// `y(xi) = sup{ y : x + mu((-inf, y)) < xi }`, `H = xi - y`, `U = u(y)`.
/// Atoms become flat pieces of `y` whose label length is the atom mass.
pub fn to_lagrangian_on(p: &EulerianPair, grid: &Grid) -> LagrangianState {
    let label = CumulativeLabel::new(p);
    let n = grid.n();
    let mut zeta = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut hh = Vec::with_capacity(n);
    for i in 0..n {
        let xi = grid.node(i);
        let y = label.inverse(xi);
        zeta.push(y - xi);
        hh.push(xi - y);
        u.push(p.u_at(y));
    }
    debug_assert!(label.total().is_finite());
    LagrangianState {
        grid: *grid,
        zeta,
        u_lag: u,
        h_cum: hh,
    }
}

/// Cell slope of `y` below which a run of cells is treated as collapsed.
pub fn singular_threshold(grid: &Grid) -> f64 {
    grid.h().sqrt()
}

/// The map `M`: velocity by inversion of `y`, energy as the pushforward of
/// `H_xi d xi` under `y`. Maximal runs of cells with `y_xi` below
/// [`singular_threshold`] become one atom each, placed at the mean `y` of the
/// run, carrying the `H` increment across the run.
///
/// The slope is measured as `y_xi / (y_xi + H_xi)`, which is `y_xi` itself on
/// the normalized section and is unchanged by relabeling, so states that are
/// not normalized are classified as their projection would be.
pub fn to_eulerian(x: &LagrangianState) -> Result<EulerianPair> {
    let n = x.n();
    let h = x.grid.h();
    let theta = singular_threshold(&x.grid);
    let y = x.y();
    let hh = &x.h_cum;
    let singular: Vec<bool> = (0..n - 1)
        .map(|c| {
            let dy = y[c + 1] - y[c];
            let dl = dy + hh[c + 1] - hh[c];
            dl <= 0.0 || dl.is_nan() || dy / dl < theta
        })
        .collect();

    let mut atoms: Vec<Atom> = Vec::new();
    let mut c = 0;
    while c < n - 1 {
        if singular[c] {
            let start = c;
            while c < n - 1 && singular[c] {
                c += 1;
            }
            let mass = hh[c] - hh[start];
            if mass > 0.0 {
                let mean_y = y[start..=c].iter().sum::<f64>() / (c - start + 1) as f64;
                atoms.push(Atom { x: mean_y, mass });
            }
        } else {
            c += 1;
        }
    }

    // Thinned output grid: drop interior nodes of collapsed runs and any node
    // that does not strictly advance y.
    let mut kept: Vec<usize> = vec![0];
    for i in 1..n {
        let last = *kept.last().unwrap();
        let interior = i < n - 1 && singular[i - 1] && singular[i];
        if !interior && y[i] > y[last] {
            kept.push(i);
        }
    }
    let xs: Vec<f64> = kept.iter().map(|&i| y[i]).collect();
    let us: Vec<f64> = kept.iter().map(|&i| x.u_lag[i]).collect();
    let density: Vec<f64> = kept
        .windows(2)
        .map(|w| {
            let regular: f64 = (w[0]..w[1])
                .filter(|&c| !singular[c])
                .map(|c| hh[c + 1] - hh[c])
                .sum();
            (regular / (y[w[1]] - y[w[0]])).max(0.0)
        })
        .collect();

    // Atoms must sit inside the output window and at distinct places.
    let (lo, hi) = (xs[0], *xs.last().unwrap());
    let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
    for mut a in atoms {
        a.x = a.x.clamp(lo, hi);
        match merged.last_mut() {
            Some(prev) if prev.x == a.x => prev.mass += a.mass,
            _ => merged.push(a),
        }
    }
    if xs.len() < 2 {
        // Entire window collapsed: widen by one ulp-scale step so the pair is representable.
        let x1 = lo + h.max(f64::EPSILON);
        return EulerianPair::new(vec![lo, x1], vec![us[0], us[0]], vec![0.0], merged);
    }
    EulerianPair::new(xs, us, density, merged)
}
