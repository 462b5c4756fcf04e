//! Scenario configuration files.

use serde::{Deserialize, Serialize};

use chol_lag::coords::{default_label_grid, to_lagrangian_on, EulerianPair};
use chol_lag::flow::{Dynamics, SolverConfig};
use chol_lag::lagrangian::{Grid, HyperelasticCoeffs, LagrangianState};
use chol_lag::oracles::PeakonConfig;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// Exact multipeakon data on `window`; `L` is evaluated from the closed form.
    Peakons {
        amplitudes: Vec<f64>,
        positions: Vec<f64>,
        window: [f64; 2],
    },
    /// Sampled velocity and energy measure.
    Sampled { pair: EulerianPair },
    /// A Lagrangian state used as is; `grid` is ignored.
    Lagrangian { state: LagrangianState },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Number of labels.
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub dt: f64,
    pub t_end: f64,
    /// Snapshot every this many steps (the first and last state are always written).
    #[serde(default)]
    pub monitor_every: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub eulerian: bool,
    pub lagrangian: bool,
    pub csv: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            eulerian: true,
            lagrangian: false,
            csv: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientSpec {
    /// `f = u^2/2`, `g = kappa u + u^2`.
    Ch {
        #[serde(default)]
        kappa: f64,
    },
    /// Named presets of the generalized equation.
    Hyperelastic { preset: HyperelasticPreset },
}

impl Default for CoefficientSpec {
    fn default() -> Self {
        CoefficientSpec::Ch { kappa: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum HyperelasticPreset {
    /// `f = gamma u^2/2`, `g = (3 - gamma) u^2/2`.
    Rod { gamma: f64 },
    /// `f = u^2/2`, `g = kappa u + u^2` through the generalized right-hand side.
    Ch { kappa: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub initial: InitialData,
    pub grid: GridSpec,
    pub solver: SolverSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
    #[serde(default)]
    pub coefficients: CoefficientSpec,
}

/// Command-line overrides applied on top of a file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub grid_n: Option<usize>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(n) = o.grid_n {
            self.grid.n = n;
        }
        if let Some(dt) = o.dt {
            self.solver.dt = dt;
        }
        if let Some(t) = o.t_end {
            self.solver.t_end = t;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(CliError::Config(format!(
                "scenario name '{}' must be non-empty and use [A-Za-z0-9_-]",
                self.name
            )));
        }
        if self.grid.n < 2 {
            return Err(CliError::Config(format!(
                "grid.n must be at least 2, got {}",
                self.grid.n
            )));
        }
        self.solver_config()?;
        match &self.initial {
            InitialData::Peakons {
                amplitudes,
                positions,
                window,
            } => {
                let p = PeakonConfig::new(amplitudes.clone(), positions.clone()).map_err(config)?;
                if window[0].is_nan() || window[1].is_nan() || window[0] >= window[1] {
                    return Err(CliError::Config(format!(
                        "empty window [{}, {}]",
                        window[0], window[1]
                    )));
                }
                // the window must cover the data: the energy outside is discarded
                let lost = p.total_energy() - p.energy_on(window[0], window[1]);
                if lost > 1e-6 * p.total_energy().max(1.0) {
                    return Err(CliError::Config(format!(
                        "window [{}, {}] misses energy {lost:.3e} of the peakons",
                        window[0], window[1]
                    )));
                }
            }
            InitialData::Sampled { .. } => {}
            InitialData::Lagrangian { state } => state.check_shape().map_err(config)?,
        }
        if let CoefficientSpec::Hyperelastic {
            preset: HyperelasticPreset::Rod { gamma },
        } = self.coefficients
        {
            if !gamma.is_finite() {
                return Err(CliError::Config("gamma must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn solver_config(&self) -> Result<SolverConfig, CliError> {
        SolverConfig::new(self.solver.dt, self.solver.t_end, self.solver.monitor_every)
            .map_err(config)
    }

    pub fn dynamics(&self) -> Dynamics {
        match self.coefficients {
            CoefficientSpec::Ch { kappa: 0.0 } => Dynamics::CamassaHolm,
            CoefficientSpec::Ch { kappa } => {
                Dynamics::Hyperelastic(HyperelasticCoeffs::camassa_holm(kappa))
            }
            CoefficientSpec::Hyperelastic { preset } => Dynamics::Hyperelastic(match preset {
                HyperelasticPreset::Rod { gamma } => HyperelasticCoeffs::hyperelastic_rod(gamma),
                HyperelasticPreset::Ch { kappa } => HyperelasticCoeffs::camassa_holm(kappa),
            }),
        }
    }

    pub fn initial_state(&self) -> Result<LagrangianState, CliError> {
        match &self.initial {
            InitialData::Peakons {
                amplitudes,
                positions,
                window,
            } => {
                let p = PeakonConfig::new(amplitudes.clone(), positions.clone()).map_err(config)?;
                let (a, b) = (window[0], window[1]);
                let grid = Grid::new(a, b + p.energy_on(a, b), self.grid.n).map_err(config)?;
                p.lagrangian(a, b, &grid).map_err(config)
            }
            InitialData::Sampled { pair } => {
                let grid = default_label_grid(pair, self.grid.n).map_err(config)?;
                Ok(to_lagrangian_on(pair, &grid))
            }
            InitialData::Lagrangian { state } => Ok(state.clone()),
        }
    }
}

fn config(e: chol_lag::Error) -> CliError {
    CliError::Config(e.to_string())
}
