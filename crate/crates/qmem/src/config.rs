//! Flat `key = value` experiment configuration.
//!
//! Lines starting with `#` are comments. Lists are comma separated. Loss
//! values may be written as `2.5pi/1000`, `pi/400` or plain decimals.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use qmem_core::routing::optimal_routes;
use qmem_core::{catalog_get, LogicalState, MetricKind, NoiseKind, StabilizerCode, Strategy};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("bad value for `{key}`: {reason}")]
    Value { key: &'static str, reason: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RouteChoice {
    Naive,
    Optimal,
    /// One order per stabilizer, 1-based qubits.
    Explicit(Vec<Vec<usize>>),
}

impl RouteChoice {
    pub fn resolve(&self, code: &StabilizerCode) -> Result<Vec<Vec<usize>>, ConfigError> {
        match self {
            RouteChoice::Naive => Ok(code.naive_routes.clone()),
            RouteChoice::Optimal => optimal_routes(code, Strategy::Exhaustive)
                .map_err(|e| ConfigError::Invalid(e.to_string())),
            RouteChoice::Explicit(orders) => Ok(orders.clone()),
        }
    }

    fn render(&self) -> String {
        match self {
            RouteChoice::Naive => "naive".into(),
            RouteChoice::Optimal => "optimal".into(),
            RouteChoice::Explicit(orders) => orders
                .iter()
                .map(|o| o.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(">"))
                .collect::<Vec<_>>()
                .join(","),
        }
    }
}

impl FromStr for RouteChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" => Ok(RouteChoice::Naive),
            "optimal" => Ok(RouteChoice::Optimal),
            _ => s
                .split(',')
                .map(|order| {
                    order
                        .split('>')
                        .map(|q| q.trim().parse::<usize>().map_err(|e| format!("`{q}`: {e}")))
                        .collect()
                })
                .collect::<Result<_, _>>()
                .map(RouteChoice::Explicit),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub code: String,
    pub logical_state: LogicalState,
    pub omega: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub relay_dephasing: f64,
    pub theta_list: Vec<f64>,
    pub noise_kind: NoiseKind,
    pub routes: RouteChoice,
    pub t_final: f64,
    /// `None` selects the model's default step.
    pub dt: Option<f64>,
    pub sample_dt: f64,
    pub n_trajectories: usize,
    pub seed: u64,
    pub metric: MetricKind,
    pub tau_list: Vec<f64>,
    pub output_dir: PathBuf,
    /// Also write every trajectory's fidelity series.
    pub write_trajectories: bool,
}

const KEYS: [&str; 18] = [
    "code",
    "logical_state",
    "Omega",
    "alpha",
    "Gamma",
    "relay_dephasing",
    "theta",
    "noise",
    "routes",
    "T",
    "dt",
    "sample_dt",
    "n_trajectories",
    "seed",
    "metric",
    "tau",
    "output_dir",
    "write_trajectories",
];

/// Parses `1.5`, `pi`, `2.5pi/1000`, `pi/400`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let Some(pos) = s.find("pi") else {
        return s.parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
    };
    let head = s[..pos].trim().trim_end_matches('*');
    let tail = s[pos + 2..].trim();
    let factor = if head.is_empty() {
        1.0
    } else {
        head.parse::<f64>().map_err(|e| format!("`{s}`: {e}"))?
    };
    let divisor = if tail.is_empty() {
        1.0
    } else {
        let d = tail
            .strip_prefix('/')
            .ok_or_else(|| format!("`{s}`: expected `/` after pi"))?;
        d.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"))?
    };
    Ok(factor * PI / divisor)
}

fn parse_list<T>(key: &'static str, value: &str, f: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, ConfigError> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|v| f(v.trim()).map_err(|reason| ConfigError::Value { key, reason }))
        .collect()
}

fn parse_value<T: FromStr>(key: &'static str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::Value {
        key,
        reason: e.to_string(),
    })
}

fn join_floats(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: Vec<(&'static str, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            let k = k.trim();
            let key = KEYS.iter().copied().find(|&known| known == k).ok_or_else(|| {
                ConfigError::UnknownKey {
                    line: i + 1,
                    key: k.into(),
                }
            })?;
            if entries.iter().any(|(seen, _)| *seen == key) {
                return Err(ConfigError::DuplicateKey {
                    line: i + 1,
                    key: k.into(),
                });
            }
            entries.push((key, v.trim().to_string()));
        }
        let get = |key: &'static str| entries.iter().find(|(k, _)| *k == key).map(|(_, v)| v.as_str());
        let need = |key: &'static str| get(key).ok_or(ConfigError::Missing(key));

        let code_name = need("code")?.to_string();
        let code = catalog_get(&code_name).map_err(|e| ConfigError::Value {
            key: "code",
            reason: e.to_string(),
        })?;
        let metric = match get("metric") {
            None | Some("default") => MetricKind::default_for(&code),
            Some(v) => parse_value("metric", v)?,
        };
        let dt = match get("dt") {
            None | Some("auto") => None,
            Some(v) => Some(parse_value("dt", v)?),
        };
        let config = Self {
            code: code_name,
            logical_state: get("logical_state").map_or(Ok(LogicalState::Zero), |v| parse_value("logical_state", v))?,
            omega: parse_value("Omega", need("Omega")?)?,
            alpha: parse_value("alpha", need("alpha")?)?,
            gamma: get("Gamma").map_or(Ok(1.0), |v| parse_value("Gamma", v))?,
            relay_dephasing: get("relay_dephasing").map_or(Ok(0.0), |v| parse_value("relay_dephasing", v))?,
            theta_list: parse_list("theta", need("theta")?, parse_angle)?,
            noise_kind: get("noise").map_or(Ok(NoiseKind::BitFlip), |v| parse_value("noise", v))?,
            routes: get("routes").map_or(Ok(RouteChoice::Naive), |v| parse_value("routes", v))?,
            t_final: parse_value("T", need("T")?)?,
            dt,
            sample_dt: parse_value("sample_dt", need("sample_dt")?)?,
            n_trajectories: parse_value("n_trajectories", need("n_trajectories")?)?,
            seed: get("seed").map_or(Ok(0), |v| parse_value("seed", v))?,
            metric,
            tau_list: parse_list("tau", get("tau").unwrap_or(""), |v| {
                v.parse::<f64>().map_err(|e| format!("`{v}`: {e}"))
            })?,
            output_dir: PathBuf::from(get("output_dir").unwrap_or("out")),
            write_trajectories: get("write_trajectories").map_or(Ok(false), |v| parse_value("write_trajectories", v))?,
        };
        config.validate(&code)?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn validate(&self, code: &StabilizerCode) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        for (name, v) in [
            ("Omega", self.omega),
            ("alpha", self.alpha),
            ("Gamma", self.gamma),
            ("relay_dephasing", self.relay_dephasing),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return invalid(format!("{name} must be a finite rate >= 0"));
            }
        }
        if self.theta_list.is_empty() {
            return invalid("theta needs at least one value".into());
        }
        if self.theta_list.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return invalid("theta values must be finite and >= 0".into());
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return invalid("T must be positive".into());
        }
        if !(self.sample_dt > 0.0) || self.sample_dt > self.t_final {
            return invalid("sample_dt must lie in (0, T]".into());
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || dt > self.sample_dt {
                return invalid("dt must lie in (0, sample_dt]".into());
            }
        }
        if self.n_trajectories == 0 {
            return invalid("n_trajectories must be at least 1".into());
        }
        if self.tau_list.iter().any(|t| !(*t >= 0.0) || *t > self.t_final) {
            return invalid("tau values must lie in [0, T]".into());
        }
        if let RouteChoice::Explicit(orders) = &self.routes {
            if orders.len() != code.n_stabilizers() {
                return invalid(format!(
                    "routes lists {} orders but {} has {} stabilizers",
                    orders.len(),
                    code.name,
                    code.n_stabilizers()
                ));
            }
            for (m, order) in code.stabilizers.iter().zip(orders) {
                qmem_core::routing::prefix_operators(m, order).map_err(|e| ConfigError::Invalid(e.to_string()))?;
            }
        }
        Ok(())
    }

    pub fn code(&self) -> StabilizerCode {
        catalog_get(&self.code).expect("validated at parse time")
    }

    /// Canonical text; `parse(render(c)) == c`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            writeln!(s, "{k} = {v}").expect("writing to a String");
        };
        line("code", self.code.clone());
        line("logical_state", self.logical_state.label().into());
        line("Omega", self.omega.to_string());
        line("alpha", self.alpha.to_string());
        line("Gamma", self.gamma.to_string());
        line("relay_dephasing", self.relay_dephasing.to_string());
        line("theta", join_floats(&self.theta_list));
        line("noise", self.noise_kind.label().into());
        line("routes", self.routes.render());
        line("T", self.t_final.to_string());
        line("dt", self.dt.map_or("auto".into(), |d| d.to_string()));
        line("sample_dt", self.sample_dt.to_string());
        line("n_trajectories", self.n_trajectories.to_string());
        line("seed", self.seed.to_string());
        line("metric", self.metric.label().into());
        line("tau", join_floats(&self.tau_list));
        line("output_dir", self.output_dir.display().to_string());
        line("write_trajectories", self.write_trajectories.to_string());
        s
    }
}
