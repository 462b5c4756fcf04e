use serde::{Deserialize, Serialize};

use crate::coords::measure::{uniform, EulerianPair};
use crate::error::{Error, Result};
use crate::lagrangian::{Grid, LagrangianState};

/// Amplitudes and positions of `u = sum p_i exp(-|x - q_i|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakonConfig {
    pub amplitudes: Vec<f64>,
    pub positions: Vec<f64>,
}

impl PeakonConfig {
    pub fn new(amplitudes: Vec<f64>, positions: Vec<f64>) -> Result<Self> {
        let cfg = Self {
            amplitudes,
            positions,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn single(c: f64, q: f64) -> Self {
        Self {
            amplitudes: vec![c],
            positions: vec![q],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.amplitudes.len() != self.positions.len() {
            return Err(Error::InvalidPeakons(format!(
                "{} amplitudes but {} positions",
                self.amplitudes.len(),
                self.positions.len()
            )));
        }
        if self
            .amplitudes
            .iter()
            .chain(&self.positions)
            .any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("peakon parameters"));
        }
        if self.positions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPeakons(
                "positions must be strictly increasing".into(),
            ));
        }
        Ok(())
    }

    pub fn u(&self, x: f64) -> f64 {
        self.amplitudes
            .iter()
            .zip(&self.positions)
            .map(|(p, q)| p * (-(x - q).abs()).exp())
            .sum()
    }

    /// Energy of `(u^2 + u_x^2) dx` on `[a, b]`, exact.
    ///
    /// Between consecutive peaks `u = L e^{-x} + R e^{x}` and the cross terms
    /// of `u^2` and `u_x^2` cancel, so the integrand is `2 L^2 e^{-2x} + 2 R^2 e^{2x}`.
    pub fn energy_on(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut cuts = vec![a];
        cuts.extend(self.positions.iter().copied().filter(|&q| q > a && q < b));
        cuts.push(b);
        cuts.windows(2).map(|w| self.smooth_piece(w[0], w[1])).sum()
    }

    /// `(s, t)` must not contain a peak.
    fn smooth_piece(&self, s: f64, t: f64) -> f64 {
        let mid = 0.5 * (s + t);
        // left-travelling part measured from s, right part measured from t
        let mut left = 0.0;
        let mut right = 0.0;
        for (p, q) in self.amplitudes.iter().zip(&self.positions) {
            if *q <= mid {
                left += p * (-(s - q)).exp();
            } else {
                right += p * (t - q).exp();
            }
        }
        let decay = -(-2.0 * (t - s)).exp_m1();
        (left * left + right * right) * decay
    }

    /// `||u||_{H^1}^2 = 2 sum_i p_i u(q_i)`, since `(1 - d_xx) e^{-|x|} = 2 delta`.
    pub fn total_energy(&self) -> f64 {
        2.0 * self
            .amplitudes
            .iter()
            .zip(&self.positions)
            .map(|(p, &q)| p * self.u(q))
            .sum::<f64>()
    }
}

impl PeakonConfig {
    /// The map `L` evaluated from the closed form: `y` solves
    /// `y + E(x_min, y) = xi` with the exact cumulative energy, `U = u(y)`.
    /// Energy outside `[x_min, x_max]` is discarded, as for a sampled pair.
    pub fn lagrangian(&self, x_min: f64, x_max: f64, grid: &Grid) -> Result<LagrangianState> {
        self.validate()?;
        let total = self.energy_on(x_min, x_max);
        let label = |y: f64| y + self.energy_on(x_min, y.min(x_max));
        let mut zeta = Vec::with_capacity(grid.n());
        let mut u = Vec::with_capacity(grid.n());
        let mut hh = Vec::with_capacity(grid.n());
        for xi in grid.nodes() {
            let y = if xi <= x_min {
                xi
            } else if xi >= x_max + total {
                xi - total
            } else {
                let (mut lo, mut hi) = ((xi - total).max(x_min), xi.min(x_max));
                while hi - lo > 1e-15 * (1.0 + hi.abs()) {
                    let mid = 0.5 * (lo + hi);
                    if label(mid) < xi {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            };
            zeta.push(y - xi);
            hh.push(xi - y);
            u.push(if y < x_min || y > x_max {
                0.0
            } else {
                self.u(y)
            });
        }
        LagrangianState::new(*grid, zeta, u, hh)
    }
}

/// Single travelling peakon `c exp(-|x - c t - x0|)`.
pub fn peakon_profile(c: f64, x0: f64, t: f64, x: f64) -> f64 {
    c * (-(x - x0 - c * t).abs()).exp()
}

/// Samples `u` on `x` and stores the exact cell averages of `u^2 + u_x^2`.
pub fn multipeakon_pair(cfg: &PeakonConfig, x: &[f64]) -> Result<EulerianPair> {
    cfg.validate()?;
    let u: Vec<f64> = x.iter().map(|&xi| cfg.u(xi)).collect();
    let density: Vec<f64> = x
        .windows(2)
        .map(|w| cfg.energy_on(w[0], w[1]) / (w[1] - w[0]))
        .collect();
    EulerianPair::new(x.to_vec(), u, density, Vec::new())
}

/// The antisymmetric peakon-antipeakon pair and what the conservative flow
/// is expected to do with it.
#[derive(Debug, Clone)]
pub struct CollisionScenario {
    pub peakons: PeakonConfig,
    pub pair: EulerianPair,
    /// Energy of the initial data; the atom at collision carries all of it.
    pub energy: f64,
    pub atom_location: f64,
}

impl CollisionScenario {
    pub const WINDOW: (f64, f64) = (-20.0, 20.0);

    pub fn with_nodes(n: usize) -> Result<Self> {
        let peakons = PeakonConfig::new(vec![1.0, -1.0], vec![-5.0, 5.0])?;
        let x = uniform(Self::WINDOW.0, Self::WINDOW.1, n)?;
        let pair = multipeakon_pair(&peakons, &x)?;
        let energy = pair.energy();
        Ok(Self {
            peakons,
            pair,
            energy,
            atom_location: 0.0,
        })
    }

    /// `u(0, -x) = -u(0, x)`: residual of the odd symmetry on a symmetric grid.
    pub fn odd_symmetry_defect(p: &EulerianPair) -> f64 {
        p.x.iter()
            .zip(&p.u)
            .map(|(&x, &u)| (u + p.u_at(-x)).abs())
            .fold(0.0, f64::max)
    }
}

/// `p = (1, -1)`, `q = (-5, 5)` on `[-20, 20]` with 4097 nodes.
pub fn collision_scenario() -> CollisionScenario {
    CollisionScenario::with_nodes(4097).expect("fixed collision data is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        // composite Simpson
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn single_peakon_energy_is_two() {
        let cfg = PeakonConfig::single(1.0, 0.0);
        assert!((cfg.total_energy() - 2.0).abs() < 1e-14);
        let x = uniform(-20.0, 20.0, 401).unwrap();
        let p = multipeakon_pair(&cfg, &x).unwrap();
        assert!((p.energy() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_config_is_zero_pair() {
        let cfg = PeakonConfig::new(vec![], vec![]).unwrap();
        let x = uniform(-1.0, 1.0, 11).unwrap();
        let p = multipeakon_pair(&cfg, &x).unwrap();
        assert_eq!(p.energy(), 0.0);
        assert!(p.u.iter().all(|&u| u == 0.0));
    }

    #[test]
    fn antisymmetric_energy_matches_quadrature() {
        let cfg = PeakonConfig::new(vec![1.0, -1.0], vec![-5.0, 5.0]).unwrap();
        // smooth pieces integrated separately, one-sided derivative at the kinks
        let piece = |a: f64, b: f64| {
            let mid = 0.5 * (a + b);
            let dens = |x: f64| {
                let ux: f64 = [(1.0, -5.0), (-1.0, 5.0)]
                    .iter()
                    .map(|&(p, q): &(f64, f64)| -p * (mid - q).signum() * (-(x - q).abs()).exp())
                    .sum();
                cfg.u(x).powi(2) + ux * ux
            };
            quad(dens, a, b, 20000)
        };
        let oracle = piece(-30.0, -5.0) + piece(-5.0, 5.0) + piece(5.0, 30.0);
        let exact = cfg.energy_on(-30.0, 30.0);
        assert!((exact - oracle).abs() < 1e-8, "{exact} vs {oracle}");
        let s = collision_scenario();
        assert!((s.energy - cfg.energy_on(-20.0, 20.0)).abs() < 1e-12);
    }

    #[test]
    fn collision_data_is_odd() {
        let s = collision_scenario();
        assert!(CollisionScenario::odd_symmetry_defect(&s.pair) < 1e-12);
    }

    #[test]
    fn rejects_unsorted_positions() {
        assert!(PeakonConfig::new(vec![1.0, 1.0], vec![1.0, 0.0]).is_err());
        assert!(PeakonConfig::new(vec![1.0], vec![1.0, 0.0]).is_err());
    }
}
