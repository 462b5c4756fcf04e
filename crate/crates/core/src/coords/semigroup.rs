use super::measure::EulerianPair;
use super::transform::{default_label_grid, to_eulerian, to_lagrangian_on};
use crate::error::Result;
use crate::flow::{sbar_t, SolverConfig};

/// The Eulerian semigroup `T_t = M o S-bar_t o L` with `n` labels on the
/// default label window, `t = cfg.t_end`.
pub fn t_t(p: &EulerianPair, n: usize, cfg: &SolverConfig) -> Result<EulerianPair> {
    let grid = default_label_grid(p, n)?;
    let x = to_lagrangian_on(p, &grid);
    to_eulerian(&sbar_t(&x, cfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coords::measure::uniform;
    use crate::oracles::{multipeakon_pair, peakon_profile, PeakonConfig};

    #[test]
    fn zero_time_is_roundtrip() {
        let cfg = PeakonConfig::single(1.0, 0.0);
        let xs = uniform(-15.0, 15.0, 1201).unwrap();
        let p = multipeakon_pair(&cfg, &xs).unwrap();
        let q = t_t(&p, 1200, &SolverConfig::new(0.01, 0.0, 0).unwrap()).unwrap();
        assert!((q.energy() - p.energy()).abs() < 1e-10);
        let err = xs
            .iter()
            .map(|&x| (q.u_at(x) - p.u_at(x)).abs())
            .fold(0.0, f64::max);
        assert!(err < 0.03, "{err}");
    }

    #[test]
    fn peakon_translates() {
        let cfg = PeakonConfig::single(1.0, 0.0);
        let xs = uniform(-15.0, 15.0, 2401).unwrap();
        let p = multipeakon_pair(&cfg, &xs).unwrap();
        let q = t_t(&p, 1200, &SolverConfig::new(0.01, 0.5, 0).unwrap()).unwrap();
        let err = xs
            .iter()
            .filter(|x| x.abs() < 10.0)
            .map(|&x| (q.u_at(x) - peakon_profile(1.0, 0.0, 0.5, x)).abs())
            .fold(0.0, f64::max);
        assert!(err < 0.03, "{err}");
        assert!((q.energy() - p.energy()).abs() < 1e-6 * p.energy());
    }
}
