use serde::{Deserialize, Serialize};

use crate::coords::measure::EulerianPair;
use crate::error::{Error, Result};
use crate::lagrangian::nonlocal::convolve_pq;

/// An Eulerian snapshot at time `t`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub pair: EulerianPair,
}

/// `phi(t, x) = b((t - t_c) / a_t) b((x - x_c) / a_x)` with the bump
/// `b(s) = exp(1 / (s^2 - 1))` on `|s| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpTestFn {
    pub t_c: f64,
    pub a_t: f64,
    pub x_c: f64,
    pub a_x: f64,
}

fn bump(s: f64) -> (f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let d = s * s - 1.0;
    let b = (1.0 / d).exp();
    (b, -2.0 * s / (d * d) * b)
}

impl BumpTestFn {
    /// `(phi, phi_t, phi_x)`.
    pub fn eval(&self, t: f64, x: f64) -> (f64, f64, f64) {
        let (bt, dbt) = bump((t - self.t_c) / self.a_t);
        let (bx, dbx) = bump((x - self.x_c) / self.a_x);
        (bt * bx, dbt / self.a_t * bx, bt * dbx / self.a_x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakResidual {
    pub r1: f64,
    pub r2: f64,
}

/// `P = 1/4 int exp(-|x - z|) (u^2 dz + d mu(z))` and `P_x` at the nodes
/// of the pair. Cells carry `(avg u^2 + density) dx` spread uniformly; atoms
/// enter as cells of zero width.
pub fn eulerian_pq_nodes(p: &EulerianPair) -> (Vec<f64>, Vec<f64>) {
    let n = p.n();
    let mut z: Vec<f64> = Vec::with_capacity(n + 2 * p.mu.atoms.len());
    let mut w: Vec<f64> = Vec::with_capacity(z.capacity());
    let mut node_at: Vec<usize> = Vec::with_capacity(n);
    let mut atoms = p.mu.atoms.iter().peekable();
    z.push(p.x[0]);
    node_at.push(0);
    for c in 0..n - 1 {
        let (a, b) = (p.x[c], p.x[c + 1]);
        let u2 = 0.5 * (p.u[c] * p.u[c] + p.u[c + 1] * p.u[c + 1]);
        let dens = u2 + p.mu.density[c];
        let mut left = a;
        while let Some(at) = atoms.peek() {
            if at.x > b || (at.x == b && c + 2 < n) {
                break;
            }
            // close the smooth piece up to the atom, then a zero-width cell
            if at.x > left {
                w.push(dens * (at.x - left));
                z.push(at.x);
                left = at.x;
            }
            w.push(at.mass);
            z.push(at.x);
            atoms.next();
        }
        w.push(dens * (b - left));
        z.push(b);
        node_at.push(z.len() - 1);
    }
    let (pp, qq) = convolve_pq(&z, &w, 0.25);
    (
        node_at.iter().map(|&k| pp[k]).collect(),
        node_at.iter().map(|&k| qq[k]).collect(),
    )
}

/// [`eulerian_pq_nodes`] averaged to cell midpoints: `(midpoints, P, P_x)`.
pub fn eulerian_pq(p: &EulerianPair) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (pn, qn) = eulerian_pq_nodes(p);
    let avg = |v: &[f64]| v.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let mid = p.x.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    (mid, avg(&pn), avg(&qn))
}

/// Residuals of the two weak identities of a global solution,
///
/// ```text
/// r1 = iint -u phi_t + (u u_x + P_x) phi  -  int u(t0) phi(t0)
/// r2 = iint (P - u^2 - u_x^2 / 2) phi + P_x phi_x
/// ```
///
/// over `[t_0, t_last]`, midpoint rule in space, trapezoid rule in time. The
/// energy term uses `u^2 + u_x^2 / 2 = (u^2 + mu) / 2` so atoms contribute.
pub fn weak_residual(snaps: &[Snapshot], phi: &BumpTestFn) -> Result<WeakResidual> {
    if snaps.len() < 2 {
        return Err(Error::InvalidConfig("need at least two snapshots".into()));
    }
    if snaps.windows(2).any(|w| w[1].t <= w[0].t) {
        return Err(Error::InvalidConfig("snapshot times must increase".into()));
    }
    let t_last = snaps[snaps.len() - 1].t;
    if phi.t_c + phi.a_t > t_last {
        return Err(Error::SupportOutsideWindow(format!(
            "test function lives until t = {} but the run ends at {t_last}",
            phi.t_c + phi.a_t
        )));
    }
    for s in snaps {
        let (lo, hi) = (s.pair.x[0], s.pair.x[s.pair.n() - 1]);
        if phi.x_c - phi.a_x < lo || phi.x_c + phi.a_x > hi {
            return Err(Error::SupportOutsideWindow(format!(
                "test function support [{}, {}] leaves [{lo}, {hi}] at t = {}",
                phi.x_c - phi.a_x,
                phi.x_c + phi.a_x,
                s.t
            )));
        }
    }

    let slices: Vec<(f64, f64, f64)> = snaps
        .iter()
        .map(|s| {
            let p = &s.pair;
            let (mid, pm, pxm) = eulerian_pq(p);
            let (mut i1, mut i2, mut i0) = (0.0, 0.0, 0.0);
            for c in 0..p.n() - 1 {
                let dx = p.x[c + 1] - p.x[c];
                let (f, ft, fx) = phi.eval(s.t, mid[c]);
                if f == 0.0 && ft == 0.0 && fx == 0.0 {
                    continue;
                }
                let um = 0.5 * (p.u[c] + p.u[c + 1]);
                let ux = (p.u[c + 1] - p.u[c]) / dx;
                i0 += um * f * dx;
                i1 += (-um * ft + (um * ux + pxm[c]) * f) * dx;
                i2 += ((pm[c] - 0.5 * (um * um + p.mu.density[c])) * f + pxm[c] * fx) * dx;
            }
            for a in &p.mu.atoms {
                i2 -= 0.5 * a.mass * phi.eval(s.t, a.x).0;
            }
            (i1, i2, i0)
        })
        .collect();

    let (mut r1, mut r2) = (0.0, 0.0);
    for k in 0..snaps.len() - 1 {
        let w = 0.5 * (snaps[k + 1].t - snaps[k].t);
        r1 += w * (slices[k].0 + slices[k + 1].0);
        r2 += w * (slices[k].1 + slices[k + 1].1);
    }
    r1 -= slices[0].2;
    Ok(WeakResidual { r1, r2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coords::measure::uniform;
    use crate::oracles::{multipeakon_pair, PeakonConfig};

    #[test]
    fn bump_derivatives_match_differences() {
        let phi = BumpTestFn {
            t_c: 0.5,
            a_t: 0.4,
            x_c: 1.0,
            a_x: 2.0,
        };
        let (t, x, e) = (0.6, 1.7, 1e-6);
        let (_, ft, fx) = phi.eval(t, x);
        let ft_fd = (phi.eval(t + e, x).0 - phi.eval(t - e, x).0) / (2.0 * e);
        let fx_fd = (phi.eval(t, x + e).0 - phi.eval(t, x - e).0) / (2.0 * e);
        assert!((ft - ft_fd).abs() < 1e-7);
        assert!((fx - fx_fd).abs() < 1e-7);
        assert_eq!(phi.eval(0.0, 1.0).0, 0.0);
    }

    #[test]
    fn zero_solution_has_zero_residuals() {
        let snaps: Vec<Snapshot> = (0..5)
            .map(|k| Snapshot {
                t: k as f64 * 0.25,
                pair: EulerianPair::zero(-5.0, 5.0, 41).unwrap(),
            })
            .collect();
        let phi = BumpTestFn {
            t_c: 0.5,
            a_t: 0.5,
            x_c: 0.0,
            a_x: 2.0,
        };
        let r = weak_residual(&snaps, &phi).unwrap();
        assert_eq!((r.r1, r.r2), (0.0, 0.0));
    }

    #[test]
    fn peakon_p_matches_closed_form() {
        // crest value of P for a unit peakon: 3/4 int e^{-3|z|} dz = 1/2
        let cfg = PeakonConfig::single(1.0, 0.0);
        let x = uniform(-20.0, 20.0, 8002).unwrap();
        let p = multipeakon_pair(&cfg, &x).unwrap();
        let (mid, pm, _) = eulerian_pq(&p);
        let k = mid.iter().position(|&m| m.abs() < 3e-3).unwrap();
        assert!((pm[k] - 0.5).abs() < 1e-2, "{}", pm[k]);
    }

    #[test]
    fn support_outside_window_rejected() {
        let snaps: Vec<Snapshot> = (0..3)
            .map(|k| Snapshot {
                t: k as f64,
                pair: EulerianPair::zero(-1.0, 1.0, 11).unwrap(),
            })
            .collect();
        let phi = BumpTestFn {
            t_c: 1.0,
            a_t: 0.5,
            x_c: 0.0,
            a_x: 2.0,
        };
        assert!(matches!(
            weak_residual(&snaps, &phi),
            Err(Error::SupportOutsideWindow(_))
        ));
    }
}
