//! Text-producing implementations of the CLI subcommands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qmem_core::routing::RouteError;
use qmem_core::{
    assemble_model, catalog_get, optimize_route, score_route, CodeError, ModelParams, NoiseKind, RouteReport, Strategy,
    CATALOG,
};
use thiserror::Error;

use crate::config::ExperimentConfig;
use crate::experiment::{model_params, simulate, tabulate, write_outputs, SimError};
use crate::output::{read_trajectory_csv, write_ensemble_csv, CsvError};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error("{0}")]
    Usage(String),
}

impl CommandError {
    /// 1 for bad invocations, 2 for failures while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            CommandError::Usage(_) => 1,
            _ => 2,
        }
    }
}

pub fn list_codes() -> String {
    let mut out = String::from("name            qubits  stabilizers  gauge\n");
    for name in CATALOG {
        let c = catalog_get(name).expect("catalog entry");
        let _ = writeln!(
            out,
            "{:<15} {:>6}  {:>11}  {}",
            c.name,
            c.n_qubits,
            c.n_stabilizers(),
            if c.is_subsystem() { "yes" } else { "no" }
        );
    }
    out
}

pub fn syndromes(code: &str) -> Result<String, CommandError> {
    Ok(catalog_get(code)?.render_syndrome_table())
}

/// Model dump for every loss value of `config`; a `# theta = ...` header
/// separates the models when there is more than one.
pub fn dump_model(config: &ExperimentConfig) -> Result<String, CommandError> {
    let code = config.code();
    let routes = config.routes.resolve(&code).map_err(SimError::from)?;
    let mut out = String::new();
    for &theta in &config.theta_list {
        let model = assemble_model(&code, model_params(config, theta), config.noise_kind, &routes)
            .map_err(SimError::from)?;
        if config.theta_list.len() > 1 {
            let _ = writeln!(out, "# theta = {theta}");
        }
        out.push_str(&model.dump());
    }
    Ok(out)
}

/// Lossless model with the fixture parameters, for dumping without a config.
pub fn dump_code(code: &str) -> Result<String, CommandError> {
    let code = catalog_get(code)?;
    let params = ModelParams {
        omega: 200.0,
        alpha: 1.0,
        theta: 0.0,
        gamma: 1.0,
        relay_dephasing: 0.0,
    };
    let model = assemble_model(&code, params, NoiseKind::BitFlip, &code.naive_routes).map_err(SimError::from)?;
    Ok(model.dump())
}

pub enum RouteRequest {
    Order(Vec<usize>),
    Naive,
    Search(Strategy),
}

pub fn parse_order(s: &str) -> Result<Vec<usize>, CommandError> {
    s.split('>')
        .map(|q| {
            q.trim()
                .parse()
                .map_err(|_| CommandError::Usage(format!("bad order `{s}`; expected e.g. 8>7>4>5>2>1")))
        })
        .collect()
}

fn render_report(report: &RouteReport, subsystem: bool) -> String {
    let c = report.counts;
    format!(
        "generator {}\norder {}\n{}counts: uncorrectable {}, correctable {}, harmless {}\n",
        report.generator,
        report.order_string(),
        report.render(subsystem),
        c.uncorrectable,
        c.correctable,
        c.harmless
    )
}

/// Routing report for stabilizer `generator` (1-based).
pub fn route(code: &str, generator: usize, request: RouteRequest) -> Result<String, CommandError> {
    let code = catalog_get(code)?;
    if generator == 0 || generator > code.n_stabilizers() {
        return Err(CommandError::Usage(format!(
            "generator must be in 1..={} for {}",
            code.n_stabilizers(),
            code.name
        )));
    }
    let m = &code.stabilizers[generator - 1];
    let report = match request {
        RouteRequest::Order(order) => score_route(&code, m, &order)?,
        RouteRequest::Naive => score_route(&code, m, &code.naive_routes[generator - 1])?,
        RouteRequest::Search(strategy) => optimize_route(&code, m, strategy)?,
    };
    Ok(render_report(&report, code.is_subsystem()))
}

pub struct SimulateOptions {
    pub workers: usize,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Runs a config and writes its files; returns a short summary.
pub fn simulate_config(config: &ExperimentConfig, opts: &SimulateOptions) -> Result<String, CommandError> {
    let mut config = config.clone();
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    if let Some(out) = &opts.out {
        config.output_dir = out.clone();
    }
    let runs = simulate(&config, opts.workers)?;
    let files = write_outputs(&config, &runs, &config.output_dir)?;
    let mut out = String::new();
    for run in &runs {
        let f = &run.table.fidelity;
        let last = f.mean.len() - 1;
        let _ = writeln!(
            out,
            "theta {}: F(T) = {} ± {}",
            run.theta, f.mean[last], f.std_error[last]
        );
    }
    for path in files {
        let _ = writeln!(out, "wrote {}", path.display());
    }
    Ok(out)
}

/// Recomputes windowed ensembles from a trajectory CSV.
pub fn fstar(input: &Path, taus: &[f64]) -> Result<String, CommandError> {
    let file = std::fs::File::open(input).map_err(|source| SimError::Io {
        path: input.to_path_buf(),
        source,
    })?;
    let records = read_trajectory_csv(file)?;
    let table = tabulate(&records, taus, 0).map_err(SimError::from)?;
    let mut buf = Vec::new();
    write_ensemble_csv(&mut buf, &table)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}
