use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use chol_lag::coords::{default_label_grid, to_eulerian, to_lagrangian_on, EulerianPair};
use chol_lag::flow::{evolve_with, Monitor, RunStats};
use chol_lag::lagrangian::{e_distance, LagrangianState};
use chol_lag::metric::{d_eulerian, OptimizerConfig};
use chol_lag::validation::{CriterionReport, Suite};

use crate::config::{Overrides, ScenarioConfig};
use crate::error::CliError;
use crate::output::{
    config_hash, ensure_dir, out_path, read_input, write_json, write_pair_csv, Tagged,
};

/// Upper limit on scenarios run at once, from `CHOL_LAG_THREADS`.
pub fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var("CHOL_LAG_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!(
                "CHOL_LAG_THREADS must be a positive integer, got '{v}'"
            ))),
        },
        Err(_) => Ok(None),
    }
}

#[derive(Serialize)]
struct SnapshotDoc<'a> {
    scenario: &'a str,
    index: usize,
    t: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    eulerian: Option<EulerianPair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lagrangian: Option<&'a LagrangianState>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    scenario: &'a str,
    config: &'a ScenarioConfig,
    energy_drift: f64,
    max_constraint_residual: f64,
    monitor: &'a Monitor,
    stats: &'a RunStats,
    files: Vec<String>,
}

pub fn simulate(
    configs: &[PathBuf],
    out_dir: &Path,
    overrides: &Overrides,
) -> Result<(), CliError> {
    if configs.is_empty() {
        return Err(CliError::Config("no --config given".into()));
    }
    let mut scenarios = Vec::with_capacity(configs.len());
    for path in configs {
        let mut cfg = ScenarioConfig::parse(&read_input(path)?).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        cfg.apply(overrides);
        cfg.validate()?;
        scenarios.push(cfg);
    }
    let mut names: Vec<&str> = scenarios.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(CliError::Config(format!(
            "duplicate scenario name '{}'",
            w[0]
        )));
    }
    ensure_dir(out_dir)?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<(), CliError>> = pool.install(|| {
        scenarios
            .par_iter()
            .map(|s| run_scenario(s, out_dir))
            .collect()
    });
    results.into_iter().collect()
}

fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> Result<(), CliError> {
    let hash = config_hash(cfg);
    let x0 = cfg.initial_state()?;
    let run = evolve_with(&x0, &cfg.solver_config()?, &cfg.dynamics())
        .map_err(|e| CliError::Solver(format!("{}: {e}", cfg.name)))?;
    let mut files = Vec::new();
    for (k, (t, x)) in run.snapshots.iter().enumerate() {
        let eulerian = if cfg.outputs.eulerian || cfg.outputs.csv {
            Some(
                to_eulerian(x)
                    .map_err(|e| CliError::Solver(format!("{}: t = {t}: {e}", cfg.name)))?,
            )
        } else {
            None
        };
        if cfg.outputs.csv {
            let name = format!("{}_t{k}.csv", cfg.name);
            write_pair_csv(
                &out_path(out_dir, &name),
                eulerian.as_ref().expect("computed above"),
            )?;
            files.push(name);
        }
        let doc = SnapshotDoc {
            scenario: &cfg.name,
            index: k,
            t: *t,
            eulerian: if cfg.outputs.eulerian { eulerian } else { None },
            lagrangian: cfg.outputs.lagrangian.then_some(x),
        };
        let name = format!("{}_t{k}.json", cfg.name);
        write_json(
            &out_path(out_dir, &name),
            &Tagged {
                config_hash: &hash,
                body: doc,
            },
        )?;
        files.push(name);
    }
    let manifest = Manifest {
        scenario: &cfg.name,
        config: cfg,
        energy_drift: run.monitor.energy_drift(),
        max_constraint_residual: run.monitor.residual.iter().fold(0.0, |m, r| m.max(*r)),
        monitor: &run.monitor,
        stats: &run.stats,
        files,
    };
    write_json(
        &out_path(out_dir, &format!("{}_manifest.json", cfg.name)),
        &Tagged {
            config_hash: &hash,
            body: manifest,
        },
    )
}

/// Parse `T` from a file holding either `T` itself or a document with `T`
/// under `key` (as written by `simulate`).
fn load<T: DeserializeOwned>(path: &Path, key: &str) -> Result<T, CliError> {
    let text = read_input(path)?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let inner = match value.get(key) {
        Some(v) => v.clone(),
        None => value,
    };
    serde_json::from_value(inner).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformMode {
    ToLagrangian,
    ToEulerian,
    Roundtrip,
}

/// Default number of labels for `L`.
pub const DEFAULT_LABELS: usize = 1024;

pub fn transform(
    mode: TransformMode,
    input: &Path,
    output: &Path,
    grid_n: Option<usize>,
) -> Result<(), CliError> {
    let text = read_input(input)?;
    let n = grid_n.unwrap_or(DEFAULT_LABELS);
    if n < 2 {
        return Err(CliError::Config(format!(
            "--grid-n must be at least 2, got {n}"
        )));
    }
    let mode_name = match mode {
        TransformMode::ToLagrangian => "to_lagrangian",
        TransformMode::ToEulerian => "to_eulerian",
        TransformMode::Roundtrip => "roundtrip",
    };
    let hash = config_hash(&json!({
        "command": "transform",
        "mode": mode_name,
        "grid_n": n,
        "input_sha256": config_hash(&text),
    }));
    let config = |e: chol_lag::Error| CliError::Config(e.to_string());
    match mode {
        TransformMode::ToLagrangian => {
            let pair: EulerianPair = load(input, "eulerian")?;
            let x = to_lagrangian_on(&pair, &default_label_grid(&pair, n).map_err(config)?);
            write_json(
                output,
                &Tagged {
                    config_hash: &hash,
                    body: json!({ "lagrangian": x }),
                },
            )
        }
        TransformMode::ToEulerian => {
            let x: LagrangianState = load(input, "lagrangian")?;
            x.check_shape().map_err(config)?;
            let p = to_eulerian(&x).map_err(config)?;
            write_json(
                output,
                &Tagged {
                    config_hash: &hash,
                    body: json!({ "eulerian": p }),
                },
            )
        }
        TransformMode::Roundtrip => {
            let pair: EulerianPair = load(input, "eulerian")?;
            let grid = default_label_grid(&pair, n).map_err(config)?;
            let x = to_lagrangian_on(&pair, &grid);
            let back = to_eulerian(&x).map_err(config)?;
            let u_linf = pair
                .x
                .iter()
                .zip(&pair.u)
                .map(|(&z, &u)| (back.u_at(z) - u).abs())
                .fold(0.0, f64::max);
            let again = to_lagrangian_on(&back, &grid);
            let report = json!({
                "h": grid.h(),
                "u_linf_discrepancy": u_linf,
                "mass_discrepancy": (back.energy() - pair.energy()).abs(),
                "lagrangian_e_discrepancy": e_distance(&x, &again).map_err(config)?,
            });
            println!("{}", serde_json::to_string(&report).expect("plain values"));
            write_json(
                output,
                &Tagged {
                    config_hash: &hash,
                    body: report,
                },
            )
        }
    }
}

pub fn metric(
    a: &Path,
    b: &Path,
    restricted: Option<f64>,
    grid_n: Option<usize>,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let pa: EulerianPair = load(a, "eulerian")?;
    let pb: EulerianPair = load(b, "eulerian")?;
    let n = grid_n.unwrap_or(DEFAULT_LABELS);
    if n < 2 {
        return Err(CliError::Config(format!(
            "--grid-n must be at least 2, got {n}"
        )));
    }
    let opt = OptimizerConfig::default();
    let hash = config_hash(&json!({
        "command": "metric",
        "a_sha256": config_hash(&read_input(a)?),
        "b_sha256": config_hash(&read_input(b)?),
        "restricted": restricted,
        "grid_n": n,
        "optimizer": opt,
    }));
    let bracket = d_eulerian(&pa, &pb, n, restricted, &opt).map_err(|e| match e {
        chol_lag::Error::EnergyBound { .. } => CliError::Config(e.to_string()),
        other => CliError::Solver(other.to_string()),
    })?;
    let doc = Tagged {
        config_hash: &hash,
        body: &bracket,
    };
    match output {
        Some(p) => write_json(p, &doc),
        None => {
            print!(
                "{}",
                String::from_utf8(crate::output::to_json(&doc)).expect("JSON is UTF-8")
            );
            Ok(())
        }
    }
}

pub fn validate(suite: &str, seed: u64, out_dir: Option<&Path>) -> Result<(), CliError> {
    let suites: Vec<Suite> = if suite == "all" {
        Suite::ALL.to_vec()
    } else {
        let known: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        vec![suite.parse().map_err(|_| {
            CliError::Config(format!(
                "unknown suite '{suite}' (expected all, {})",
                known.join(", ")
            ))
        })?]
    };
    let reports: Vec<CriterionReport> = suites
        .iter()
        .map(|s| {
            let r = s.run(seed);
            println!("{r}");
            r
        })
        .collect();
    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
        let hash = config_hash(&json!({ "command": "validate", "suite": suite, "seed": seed }));
        let name = format!("validate_{suite}.json");
        write_json(
            &out_path(dir, &name),
            &Tagged {
                config_hash: &hash,
                body: json!({ "seed": seed, "reports": reports }),
            },
        )?;
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(CliError::Failed(failed));
    }
    Ok(())
}
