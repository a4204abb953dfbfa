//! Config-driven simulation sweeps and their files on disk.

use std::fs;
use std::path::{Path, PathBuf};

use qmem_core::metrics::{ensemble_average, FidelityEvaluator, MetricSelector};
use qmem_core::{
    assemble_model, encode_initial_state, BuildError, CompiledModel, DynamicsError, EnsembleResult, ModelParams,
    TrajectoryRecord, TrajectorySettings,
};
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig};
use crate::ensemble::{run_parallel, EnsembleError};
use crate::output::{write_ensemble_csv, write_trajectory_csv, CsvError, EnsembleTable};
use crate::plot::{line_plot, Series};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("theta = {theta}: {source}")]
    Run { theta: f64, source: EnsembleError },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Ensemble results for one loss value.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaRun {
    pub theta: f64,
    pub table: EnsembleTable,
    pub records: Vec<TrajectoryRecord>,
}

pub fn model_params(config: &ExperimentConfig, theta: f64) -> ModelParams {
    ModelParams {
        omega: config.omega,
        alpha: config.alpha,
        theta,
        gamma: config.gamma,
        relay_dephasing: config.relay_dephasing,
    }
}

/// Fidelity and windowed ensembles from per-trajectory records.
pub fn tabulate(records: &[TrajectoryRecord], taus: &[f64], seed: u64) -> Result<EnsembleTable, DynamicsError> {
    let with_seed = |mut r: EnsembleResult| {
        r.seed = seed;
        r
    };
    let fidelity = with_seed(ensemble_average(records, MetricSelector::fidelity(0))?);
    let windowed = taus
        .iter()
        .map(|&tau| Ok((tau, with_seed(ensemble_average(records, MetricSelector::windowed(0, tau))?))))
        .collect::<Result<_, DynamicsError>>()?;
    Ok(EnsembleTable { fidelity, windowed })
}

/// Runs the ensemble for every `theta` in the config.
pub fn simulate(config: &ExperimentConfig, workers: usize) -> Result<Vec<ThetaRun>, SimError> {
    let code = config.code();
    let routes = config.routes.resolve(&code)?;
    let psi0 = encode_initial_state(&code, config.logical_state, code.n_stabilizers())?;
    let metrics = [FidelityEvaluator::new(config.metric, &code, config.logical_state, &psi0)];
    config
        .theta_list
        .iter()
        .map(|&theta| {
            let model = assemble_model(&code, model_params(config, theta), config.noise_kind, &routes)?;
            let compiled = CompiledModel::new(&model);
            let dt = config
                .dt
                .unwrap_or_else(|| compiled.default_dt())
                .min(config.sample_dt);
            let settings = TrajectorySettings {
                t_final: config.t_final,
                dt,
                sample_dt: config.sample_dt,
            };
            let records = run_parallel(&compiled, &psi0, &settings, &metrics, config.n_trajectories, config.seed, workers)
                .map_err(|source| SimError::Run { theta, source })?;
            let table = tabulate(&records, &config.tau_list, config.seed)?;
            Ok(ThetaRun { theta, table, records })
        })
        .collect()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SimError + '_ {
    move |source| SimError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn create(path: &Path) -> Result<fs::File, SimError> {
    fs::File::create(path).map_err(io_err(path))
}

fn theta_label(theta: f64) -> String {
    let units = theta * 1000.0 / std::f64::consts::PI;
    format!("θ = {}π/1000", (units * 1e6).round() / 1e6)
}

/// Writes `config.txt`, `fidelity_theta<k>.csv` per loss value, optional
/// `trajectories_theta<k>.csv`, and SVG plots. Returns the files written.
pub fn write_outputs(config: &ExperimentConfig, runs: &[ThetaRun], dir: &Path) -> Result<Vec<PathBuf>, SimError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    let path = dir.join("config.txt");
    fs::write(&path, config.render()).map_err(io_err(&path))?;
    written.push(path);
    for (k, run) in runs.iter().enumerate() {
        let path = dir.join(format!("fidelity_theta{k}.csv"));
        write_ensemble_csv(create(&path)?, &run.table)?;
        written.push(path);
        if config.write_trajectories {
            let path = dir.join(format!("trajectories_theta{k}.csv"));
            write_trajectory_csv(create(&path)?, &run.records, 0)?;
            written.push(path);
        }
    }

    let metric = config.metric.label();
    let series: Vec<Series> = runs
        .iter()
        .map(|r| Series {
            label: theta_label(r.theta),
            x: r.table.fidelity.time_grid.clone(),
            y: r.table.fidelity.mean.clone(),
        })
        .collect();
    let path = dir.join("fidelity.svg");
    let title = format!("{}: mean {metric} fidelity, n = {}", config.code, config.n_trajectories);
    fs::write(&path, line_plot(&title, "t", "F(t)", &series)).map_err(io_err(&path))?;
    written.push(path);
    if !config.tau_list.is_empty() {
        for (k, run) in runs.iter().enumerate() {
            let mut series = vec![Series {
                label: "F".into(),
                x: run.table.fidelity.time_grid.clone(),
                y: run.table.fidelity.mean.clone(),
            }];
            series.extend(run.table.windowed.iter().map(|(tau, r)| Series {
                label: format!("F*, τ = {tau}"),
                x: r.time_grid.clone(),
                y: r.mean.clone(),
            }));
            let path = dir.join(format!("fstar_theta{k}.svg"));
            let title = format!("{}: windowed fidelity, {}", config.code, theta_label(run.theta));
            fs::write(&path, line_plot(&title, "t", "F*(t)", &series)).map_err(io_err(&path))?;
            written.push(path);
        }
    }
    Ok(written)
}
