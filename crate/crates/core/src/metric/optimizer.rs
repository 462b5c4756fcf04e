//! Search for a relabeling `f` minimizing `||X_src o f - X_dst||_E`.

use serde::{Deserialize, Serialize};

use super::segtree::MaxTree;
use crate::flow::{label_map, Relabeling};
use crate::lagrangian::LagrangianState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Coordinate-descent sweeps over all knots.
    pub max_sweeps: usize,
    /// Stop once a sweep at the finest step improves by less than this fraction.
    pub rel_tol: f64,
    /// Slopes of candidate relabelings stay in `[1/(1+k), 1+k]`.
    pub kappa_max: f64,
    /// Half-width of the alignment band in grid cells; automatic when `None`.
    pub band: Option<usize>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_sweeps: 200,
            rel_tol: 1e-6,
            kappa_max: 10.0,
            band: None,
        }
    }
}

/// Incrementally maintained `||X_src o f - X_dst||_E` as a function of the knots of `f`.
struct Objective<'a> {
    src: &'a LagrangianState,
    dst: &'a LagrangianState,
    h: f64,
    f: Vec<f64>,
    dz: Vec<f64>,
    du: Vec<f64>,
    dh: Vec<f64>,
    max_z: MaxTree,
    max_h: MaxTree,
    sz: f64,
    su: f64,
    sh: f64,
    tu: f64,
}

impl<'a> Objective<'a> {
    fn new(src: &'a LagrangianState, dst: &'a LagrangianState, f: Vec<f64>) -> Self {
        let n = src.n();
        let mut dz = vec![0.0; n];
        let mut du = vec![0.0; n];
        let mut dh = vec![0.0; n];
        for i in 0..n {
            let v = Self::residual(src, dst, i, f[i]);
            dz[i] = v.0;
            du[i] = v.1;
            dh[i] = v.2;
        }
        let abs = |v: &[f64]| v.iter().map(|x| x.abs()).collect::<Vec<_>>();
        let mut obj = Self {
            src,
            dst,
            h: src.grid.h(),
            max_z: MaxTree::new(&abs(&dz)),
            max_h: MaxTree::new(&abs(&dh)),
            f,
            dz,
            du,
            dh,
            sz: 0.0,
            su: 0.0,
            sh: 0.0,
            tu: 0.0,
        };
        obj.resum();
        obj
    }

    #[inline]
    fn residual(
        src: &LagrangianState,
        dst: &LagrangianState,
        i: usize,
        fi: f64,
    ) -> (f64, f64, f64) {
        let g = &src.grid;
        let xi = g.node(i);
        (
            g.interp(&src.zeta, fi).0 + (fi - xi) - dst.zeta[i],
            g.interp(&src.u_lag, fi).0 - dst.u_lag[i],
            g.interp(&src.h_cum, fi).0 - dst.h_cum[i],
        )
    }

    fn resum(&mut self) {
        let h = self.h;
        let d2 = |v: &[f64]| {
            v.windows(2)
                .map(|w| (w[1] - w[0]) * (w[1] - w[0]))
                .sum::<f64>()
                / h
        };
        self.sz = d2(&self.dz);
        self.su = d2(&self.du);
        self.sh = d2(&self.dh);
        let n = self.du.len();
        let sq: f64 = self.du.iter().map(|v| v * v).sum();
        self.tu = h * (sq - 0.5 * (self.du[0].powi(2) + self.du[n - 1].powi(2)));
    }

    fn value(&self) -> f64 {
        self.max_z.max()
            + self.sz.max(0.0).sqrt()
            + (self.tu + self.su).max(0.0).sqrt()
            + self.max_h.max()
            + self.sh.max(0.0).sqrt()
    }

    /// Contributions of node `i` to the local sums: cells `i-1`, `i` and the trapezoid weight.
    fn local(&self, i: usize, z: f64, u: f64, hv: f64) -> (f64, f64, f64, f64) {
        let n = self.dz.len();
        let h = self.h;
        let (mut sz, mut su, mut sh) = (0.0, 0.0, 0.0);
        if i > 0 {
            sz += (z - self.dz[i - 1]).powi(2);
            su += (u - self.du[i - 1]).powi(2);
            sh += (hv - self.dh[i - 1]).powi(2);
        }
        if i + 1 < n {
            sz += (self.dz[i + 1] - z).powi(2);
            su += (self.du[i + 1] - u).powi(2);
            sh += (self.dh[i + 1] - hv).powi(2);
        }
        let w = if i == 0 || i + 1 == n { 0.5 * h } else { h };
        (sz / h, su / h, sh / h, w * u * u)
    }

    fn set(&mut self, i: usize, fi: f64) {
        let (z, u, hv) = Self::residual(self.src, self.dst, i, fi);
        let old = self.local(i, self.dz[i], self.du[i], self.dh[i]);
        let new = self.local(i, z, u, hv);
        self.sz += new.0 - old.0;
        self.su += new.1 - old.1;
        self.sh += new.2 - old.2;
        self.tu += new.3 - old.3;
        self.f[i] = fi;
        self.dz[i] = z;
        self.du[i] = u;
        self.dh[i] = hv;
        self.max_z.set(i, z.abs());
        self.max_h.set(i, hv.abs());
    }

    /// Feasible interval of knot `i` given its neighbours and the slope bounds.
    fn bounds(&self, i: usize, smin: f64, smax: f64) -> (f64, f64) {
        let n = self.f.len();
        let h = self.h;
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        if i > 0 {
            lo = lo.max(self.f[i - 1] + h * smin);
            hi = hi.min(self.f[i - 1] + h * smax);
        }
        if i + 1 < n {
            lo = lo.max(self.f[i + 1] - h * smax);
            hi = hi.min(self.f[i + 1] - h * smin);
        }
        (lo, hi)
    }
}

/// Clamp successive slopes of `f` into `[smin, smax]` (left to right).
pub(crate) fn project_slopes(f: &mut [f64], h: f64, smin: f64, smax: f64) {
    for i in 1..f.len() {
        let lo = f[i - 1] + h * smin;
        let hi = f[i - 1] + h * smax;
        f[i] = f[i].clamp(lo, hi);
    }
}

/// Monotone alignment of the `(y, U, H)` profiles by dynamic programming:
/// `i(j)` nondecreasing with increments in `0..=3`, inside a band around the
/// diagonal, minimizing the summed squared pointwise gap.
fn dp_alignment(src: &LagrangianState, dst: &LagrangianState, band: usize) -> Vec<f64> {
    let n = src.n();
    let width = 2 * band + 1;
    let ys = src.y();
    let yd = dst.y();
    let cost = |j: usize, i: usize| {
        (ys[i] - yd[j]).powi(2)
            + (src.u_lag[i] - dst.u_lag[j]).powi(2)
            + (src.h_cum[i] - dst.h_cum[j]).powi(2)
    };
    let col = |j: usize, k: usize| -> Option<usize> {
        let i = j as isize - band as isize + k as isize;
        (i >= 0 && (i as usize) < n).then_some(i as usize)
    };
    let mut acc = vec![f64::INFINITY; width];
    let mut back: Vec<u8> = vec![0; n * width];
    for (k, a) in acc.iter_mut().enumerate() {
        if let Some(i) = col(0, k) {
            *a = cost(0, i);
        }
    }
    for j in 1..n {
        let mut next = vec![f64::INFINITY; width];
        for k in 0..width {
            let Some(i) = col(j, k) else { continue };
            let mut best = f64::INFINITY;
            let mut arg = 0u8;
            for s in 0..=3usize {
                // previous row index i - s sits at column k + 1 - s of row j - 1
                if i < s || k + 1 < s {
                    continue;
                }
                let kp = k + 1 - s;
                if kp >= width {
                    continue;
                }
                if acc[kp] < best {
                    best = acc[kp];
                    arg = s as u8;
                }
            }
            if best.is_finite() {
                next[k] = best + cost(j, i);
                back[j * width + k] = arg;
            }
        }
        acc = next;
    }
    let mut k = (0..width)
        .filter(|&k| acc[k].is_finite())
        .min_by(|&a, &b| acc[a].total_cmp(&acc[b]))
        .unwrap_or(band);
    let mut idx = vec![0usize; n];
    for j in (0..n).rev() {
        idx[j] = col(j, k).unwrap_or(j);
        if j > 0 {
            let s = back[j * width + k] as usize;
            k = k + 1 - s;
        }
    }
    idx.iter().map(|&i| src.grid.node(i)).collect()
}

fn auto_band(src: &LagrangianState, dst: &LagrangianState) -> usize {
    let n = src.n();
    let h = src.grid.h();
    let ys = src.y();
    let yd = dst.y();
    let mut shift = 0.0_f64;
    for i in 0..n {
        shift = shift.max((ys[i] - yd[i]).abs() + (src.h_cum[i] - dst.h_cum[i]).abs());
    }
    let want = (2.0 * shift / h).ceil() as usize + 8;
    // keep the table at a few million entries
    let cap = (4_000_000 / n.max(1)).max(8) / 2;
    want.min(cap).min(n)
}

/// Result of minimizing one term of `J`.
#[derive(Debug, Clone)]
pub struct TermFit {
    pub f: Relabeling,
    pub value: f64,
    pub sweeps: usize,
}

/// Minimize `||src o f - dst||_E` over piecewise-linear relabelings with knots
/// on the grid. Starts from the best of the identity, the map matching the
/// `y + H` profiles and a monotone alignment, then refines the knots by
/// coordinate descent.
pub fn fit_term(src: &LagrangianState, dst: &LagrangianState, opt: &OptimizerConfig) -> TermFit {
    let grid = src.grid;
    let n = grid.n();
    let h = grid.h();
    let smax = 1.0 + opt.kappa_max;
    let smin = 1.0 / smax;

    let mut starts: Vec<Vec<f64>> = vec![grid.nodes()];
    if let (Ok(ha), Ok(hb)) = (label_map(src), label_map(dst)) {
        if let Ok(m) = ha.invert().compose(&hb) {
            let mut f = m.values();
            project_slopes(&mut f, h, smin, smax);
            starts.push(f);
        }
    }
    let band = opt.band.unwrap_or_else(|| auto_band(src, dst));
    if band > 0 && n > 2 {
        let mut f = dp_alignment(src, dst, band);
        project_slopes(&mut f, h, smin, smax);
        starts.push(f);
    }

    let mut best: Option<Objective> = None;
    for f in starts {
        let obj = Objective::new(src, dst, f);
        if best.as_ref().is_none_or(|b| obj.value() < b.value()) {
            best = Some(obj);
        }
    }
    let mut obj = best.expect("at least the identity start");

    let mut step = 0.5 * h;
    let min_step = h * 1e-6;
    let mut sweeps = 0;
    let mut current = obj.value();
    while sweeps < opt.max_sweeps && current > 0.0 {
        sweeps += 1;
        for i in 0..n {
            let (lo, hi) = obj.bounds(i, smin, smax);
            if lo > hi {
                continue;
            }
            let fi = obj.f[i];
            let before = obj.value();
            let mut best_v = before;
            let mut best_f = fi;
            for cand in [fi - step, fi + step] {
                let c = cand.clamp(lo, hi);
                if c == fi {
                    continue;
                }
                obj.set(i, c);
                let v = obj.value();
                if v < best_v {
                    best_v = v;
                    best_f = c;
                }
            }
            obj.set(i, best_f);
        }
        obj.resum();
        let v = obj.value();
        let gain = (current - v) / current.max(f64::MIN_POSITIVE);
        current = v;
        if gain < opt.rel_tol {
            step *= 0.5;
            if step < min_step {
                break;
            }
        }
    }

    let f = Relabeling::new(grid, &obj.f)
        .expect("slope projection keeps the knots strictly increasing");
    TermFit {
        value: current,
        f,
        sweeps,
    }
}
