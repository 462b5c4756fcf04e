use serde::{Deserialize, Serialize};

use super::relabel::project_pi;
use crate::error::{Error, Result};
use crate::lagrangian::{
    check_membership, rhs, rhs_hyperelastic, HyperelasticCoeffs, LagrangianState, Tangent,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub scheme: Scheme,
    /// Record a snapshot every this many steps (0 records only the ends).
    #[serde(default)]
    pub monitor_every: usize,
}

/// Smallest sub-step tried after repeated rejections.
pub const DT_MIN: f64 = 1e-10;

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64, monitor_every: usize) -> Result<Self> {
        let cfg = Self {
            dt,
            t_end,
            scheme: Scheme::Rk4,
            monitor_every,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "t_end must be nonnegative, got {}",
                self.t_end
            )));
        }
        Ok(())
    }

    /// Number of steps; the last one is shortened to land on `t_end`.
    pub fn steps(&self) -> usize {
        let r = self.t_end / self.dt;
        let k = r.round();
        if (r - k).abs() < 1e-9 * r.max(1.0) {
            k as usize
        } else {
            r.ceil() as usize
        }
    }

    pub fn time_of(&self, k: usize) -> f64 {
        (k as f64 * self.dt).min(self.t_end)
    }
}

/// Which right-hand side drives the flow.
#[derive(Debug, Clone, Default)]
pub enum Dynamics {
    #[default]
    CamassaHolm,
    Hyperelastic(HyperelasticCoeffs),
}

impl Dynamics {
    pub fn rhs(&self, x: &LagrangianState) -> Result<Tangent> {
        match self {
            Dynamics::CamassaHolm => rhs(x),
            Dynamics::Hyperelastic(c) => rhs_hyperelastic(x, c),
        }
    }
}

/// Stability guard `0.5 / max(1, ||U||_inf)`.
pub fn dt_max(x: &LagrangianState) -> f64 {
    0.5 / x.max_abs_u().max(1.0)
}

fn check_label_slope(x: &LagrangianState, t: f64) -> Result<()> {
    for c in 0..x.n() - 1 {
        let dy = x.y_at(c + 1) - x.y_at(c);
        let dh = x.h_cum[c + 1] - x.h_cum[c];
        if dy + dh <= 0.0 || !(dy + dh).is_finite() {
            return Err(Error::ConstraintCollapse { t, cell: c });
        }
    }
    Ok(())
}

/// One classical RK4 step.
pub fn step_with(x: &LagrangianState, dt: f64, dynamics: &Dynamics) -> Result<LagrangianState> {
    let k1 = dynamics.rhs(x)?;
    let k2 = dynamics.rhs(&x.axpy(0.5 * dt, &k1))?;
    let k3 = dynamics.rhs(&x.axpy(0.5 * dt, &k2))?;
    let k4 = dynamics.rhs(&x.axpy(dt, &k3))?;
    let comb = |a: &[f64], b: &[f64], c: &[f64], d: &[f64], v: &[f64]| -> Vec<f64> {
        (0..v.len())
            .map(|i| v[i] + dt / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]))
            .collect()
    };
    let out = LagrangianState {
        grid: x.grid,
        zeta: comb(&k1.d_zeta, &k2.d_zeta, &k3.d_zeta, &k4.d_zeta, &x.zeta),
        u_lag: comb(&k1.d_u, &k2.d_u, &k3.d_u, &k4.d_u, &x.u_lag),
        h_cum: comb(&k1.d_h, &k2.d_h, &k3.d_h, &k4.d_h, &x.h_cum),
    };
    check_label_slope(&out, f64::NAN)?;
    Ok(out)
}

/// One RK4 step of the Camassa-Holm system.
pub fn step(x: &LagrangianState, dt: f64) -> Result<LagrangianState> {
    step_with(x, dt, &Dynamics::CamassaHolm)
}

/// Advance by `dt`, halving the sub-step whenever a stage is rejected.
fn advance(
    x: &LagrangianState,
    t: f64,
    dt: f64,
    dynamics: &Dynamics,
    stats: &mut RunStats,
) -> Result<LagrangianState> {
    let mut cur = x.clone();
    let mut remaining = dt;
    let mut sub = dt.min(dt_max(x));
    while remaining > 0.0 {
        let try_dt = sub.min(remaining);
        match step_with(&cur, try_dt, dynamics) {
            Ok(next) => {
                cur = next;
                remaining -= try_dt;
                if remaining < 1e-14 * dt {
                    remaining = 0.0;
                }
                stats.substeps += 1;
                sub = (2.0 * sub).min(dt_max(&cur));
            }
            Err(Error::NonMonotone { .. }) | Err(Error::ConstraintCollapse { .. }) => {
                stats.rejections += 1;
                sub *= 0.5;
                if sub < DT_MIN {
                    return Err(Error::StepUnderflow {
                        t: t + dt - remaining,
                        dt: sub,
                    });
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(cur)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub steps: usize,
    pub substeps: usize,
    pub rejections: usize,
}

/// Monitored quantities of a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Monitor {
    pub t: Vec<f64>,
    /// `H(t, xi_max)`.
    pub energy: Vec<f64>,
    /// Largest cell residual of the compatibility constraint.
    pub residual: Vec<f64>,
}

impl Monitor {
    fn record(&mut self, t: f64, x: &LagrangianState) {
        self.t.push(t);
        self.energy.push(x.energy());
        self.residual
            .push(check_membership(x, f64::INFINITY).max_cell_residual);
    }

    /// `max_t |E(t) - E(0)| / E(0)` (absolute drift when `E(0) = 0`).
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy.first().copied().unwrap_or(0.0);
        let scale = if e0 > 0.0 { e0 } else { 1.0 };
        self.energy
            .iter()
            .map(|e| (e - e0).abs() / scale)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub snapshots: Vec<(f64, LagrangianState)>,
    pub monitor: Monitor,
    pub stats: RunStats,
}

impl Trajectory {
    pub fn last(&self) -> &LagrangianState {
        &self
            .snapshots
            .last()
            .expect("trajectory has a final state")
            .1
    }
}

/// Integrate with a callback on every accepted step `(t, state)`, including
/// the initial one. Returns the final state.
pub fn integrate<F>(
    x0: &LagrangianState,
    cfg: &SolverConfig,
    dynamics: &Dynamics,
    mut on_step: F,
) -> Result<(LagrangianState, RunStats)>
where
    F: FnMut(usize, f64, &LagrangianState),
{
    cfg.validate()?;
    x0.check_shape()?;
    let mut stats = RunStats::default();
    let mut x = x0.clone();
    on_step(0, 0.0, &x);
    let steps = cfg.steps();
    for k in 0..steps {
        let t0 = cfg.time_of(k);
        let t1 = if k + 1 == steps {
            cfg.t_end
        } else {
            cfg.time_of(k + 1)
        };
        x = advance(&x, t0, t1 - t0, dynamics, &mut stats)?;
        stats.steps += 1;
        on_step(k + 1, t1, &x);
    }
    Ok((x, stats))
}

/// Integrate, keeping snapshots every `monitor_every` steps and at the end.
pub fn evolve_with(
    x0: &LagrangianState,
    cfg: &SolverConfig,
    dynamics: &Dynamics,
) -> Result<Trajectory> {
    let steps = cfg.steps();
    let mut snapshots = Vec::new();
    let mut monitor = Monitor::default();
    let every = cfg.monitor_every;
    let (_, stats) = integrate(x0, cfg, dynamics, |k, t, x| {
        if k == 0 || k == steps || (every > 0 && k % every == 0) {
            snapshots.push((t, x.clone()));
            monitor.record(t, x);
        }
    })?;
    Ok(Trajectory {
        snapshots,
        monitor,
        stats,
    })
}

pub fn evolve(x0: &LagrangianState, cfg: &SolverConfig) -> Result<Trajectory> {
    evolve_with(x0, cfg, &Dynamics::CamassaHolm)
}

/// Final state of the Camassa-Holm flow, without snapshots.
pub fn solve(x0: &LagrangianState, cfg: &SolverConfig) -> Result<LagrangianState> {
    integrate(x0, cfg, &Dynamics::CamassaHolm, |_, _, _| {}).map(|(x, _)| x)
}

/// `(y, U, H) -> (y, -U, H)`. Conjugating the flow by this map runs it
/// backward in time.
pub fn reverse_velocity(x: &LagrangianState) -> LagrangianState {
    LagrangianState {
        u_lag: x.u_lag.iter().map(|u| -u).collect(),
        ..x.clone()
    }
}

/// `S_{-t} X` for `t = cfg.t_end`.
pub fn solve_backward(x0: &LagrangianState, cfg: &SolverConfig) -> Result<LagrangianState> {
    solve(&reverse_velocity(x0), cfg).map(|x| reverse_velocity(&x))
}

/// `S-bar_t = Pi o S_t` on the normalized section.
pub fn sbar_t(x0: &LagrangianState, cfg: &SolverConfig) -> Result<LagrangianState> {
    project_pi(&solve(x0, cfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::Grid;
    use crate::oracles::PeakonConfig;

    fn peakon(n: usize) -> LagrangianState {
        let cfg = PeakonConfig::single(1.0, 0.0);
        let g = Grid::new(-15.0, 15.0 + cfg.energy_on(-15.0, 15.0), n).unwrap();
        cfg.lagrangian(-15.0, 15.0, &g).unwrap()
    }

    fn crest(x: &LagrangianState) -> f64 {
        let i = (0..x.n())
            .max_by(|&a, &b| x.u_lag[a].total_cmp(&x.u_lag[b]))
            .unwrap();
        x.y_at(i)
    }

    #[test]
    fn zero_state_is_stationary() {
        let x = LagrangianState::zero(Grid::new(-1.0, 1.0, 11).unwrap());
        assert_eq!(step(&x, 0.1).unwrap(), x);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(SolverConfig::new(0.0, 1.0, 0).is_err());
        assert!(SolverConfig::new(0.1, -1.0, 0).is_err());
        assert!(SolverConfig::new(f64::NAN, 1.0, 0).is_err());
    }

    #[test]
    fn step_count_lands_on_t_end() {
        let cfg = SolverConfig::new(0.3, 1.0, 0).unwrap();
        assert_eq!(cfg.steps(), 4);
        assert_eq!(cfg.time_of(4), 1.0);
        assert_eq!(SolverConfig::new(0.1, 1.0, 0).unwrap().steps(), 10);
    }

    #[test]
    fn crest_moves_with_unit_speed() {
        let x = peakon(1201);
        let y = step(&x, 0.01).unwrap();
        let shift = crest(&y) - crest(&x);
        assert!((shift - 0.01).abs() < 1e-4, "{shift}");
    }

    #[test]
    fn semigroup_property() {
        let x = peakon(601);
        let whole = solve(&x, &SolverConfig::new(0.01, 0.4, 0).unwrap()).unwrap();
        let half = SolverConfig::new(0.01, 0.2, 0).unwrap();
        let split = solve(&solve(&x, &half).unwrap(), &half).unwrap();
        let d = crate::metric::linf_dist(&whole, &split).unwrap();
        assert!(d < 1e-12, "{d}");
    }

    #[test]
    fn reversal_returns_to_the_start() {
        let x = peakon(601);
        let cfg = SolverConfig::new(0.01, 0.3, 0).unwrap();
        let back = solve_backward(&solve(&x, &cfg).unwrap(), &cfg).unwrap();
        let d = crate::metric::linf_dist(&x, &back).unwrap();
        assert!(d < 1e-8, "{d}");
    }

    #[test]
    fn trajectory_records_monitor_times() {
        let x = peakon(301);
        let run = evolve(&x, &SolverConfig::new(0.05, 0.5, 2).unwrap()).unwrap();
        assert_eq!(run.monitor.t.len(), 6);
        assert_eq!(run.snapshots.len(), 6);
        assert!(run.monitor.energy_drift() < 1e-12);
        assert_eq!(run.stats.steps, 10);
    }
}
