//! Fidelity observables, the windowed maximum `F*`, and ensemble statistics.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::codes::{LogicalState, StabilizerCode};
use crate::dynamics::{StateVector, TrajectoryRecord};
use crate::ops::{Layout, Monomial, SparseOperator};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("window {tau} outside [0, {horizon}]")]
    InvalidWindow { tau: f64, horizon: f64 },
    #[error("time grids of the records differ")]
    GridMismatch,
    #[error("no records to average")]
    Empty,
    #[error("metric index {0} out of range")]
    MetricIndex(usize),
    #[error("unknown metric '{0}'")]
    UnknownMetric(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    Strict,
    Subsystem,
}

impl MetricKind {
    pub fn label(self) -> &'static str {
        match self {
            MetricKind::Strict => "strict",
            MetricKind::Subsystem => "subsystem",
        }
    }

    /// Strict for stabilizer codes, subsystem for codes with gauge freedom.
    pub fn default_for(code: &StabilizerCode) -> Self {
        if code.is_subsystem() {
            MetricKind::Subsystem
        } else {
            MetricKind::Strict
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for MetricKind {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "strict" => Ok(MetricKind::Strict),
            "subsystem" => Ok(MetricKind::Subsystem),
            other => Err(MetricError::UnknownMetric(other.into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    pub kind: MetricKind,
    pub logical_state: LogicalState,
    pub tau_list: Vec<f64>,
}

fn check_dims(a: usize, b: usize) -> Result<(), MetricError> {
    if a == b {
        Ok(())
    } else {
        Err(MetricError::DimensionMismatch { left: a, right: b })
    }
}

/// Register factor of a product state, read from its largest relay slice.
pub fn register_factor(psi: &StateVector) -> Vec<Complex64> {
    let n_rel = 1usize << psi.n_relays;
    let n_reg = 1usize << psi.n_register;
    let slice_norm = |r: usize| -> f64 {
        (0..n_reg).map(|q| psi.amplitudes[q * n_rel + r].norm_sqr()).sum()
    };
    let mut best = 0;
    let mut best_norm = slice_norm(0);
    for r in 1..n_rel {
        let n = slice_norm(r);
        if n > best_norm {
            best = r;
            best_norm = n;
        }
    }
    let scale = 1.0 / libm::sqrt(best_norm);
    (0..n_reg)
        .map(|q| psi.amplitudes[q * n_rel + best] * scale)
        .collect()
}

/// `<psi| (|reg><reg| ⊗ I) |psi> / <psi|psi>` with `reg` normalized.
fn strict_overlap(psi: &[Complex64], n_relays: usize, reg: &[Complex64]) -> f64 {
    let n_rel = 1usize << n_relays;
    let mut total = 0.0;
    let mut norm = 0.0;
    for r in 0..n_rel {
        let mut acc = Complex64::new(0.0, 0.0);
        for (q, c) in reg.iter().enumerate() {
            let a = psi[q * n_rel + r];
            acc += c.conj() * a;
            norm += a.norm_sqr();
        }
        total += acc.norm_sqr();
    }
    total / norm
}

pub fn fidelity_strict(psi: &StateVector, psi0: &StateVector) -> Result<f64, MetricError> {
    check_dims(psi.amplitudes.len(), psi0.amplitudes.len())?;
    check_dims(psi.n_relays, psi0.n_relays)?;
    let reg = register_factor(psi0);
    Ok(strict_overlap(&psi.amplitudes, psi.n_relays, &reg))
}

/// Factors `(I + P_k)/2` of the logical projector as full-space operators.
fn projector_factors(code: &StabilizerCode, logical: LogicalState, n_relays: usize) -> Vec<SparseOperator> {
    let layout = Layout::new(code.n_qubits, n_relays);
    code.logical_projector(logical)
        .factors
        .iter()
        .map(|p| SparseOperator {
            layout,
            terms: alloc::vec![
                Monomial::identity(Complex64::new(0.5, 0.0)),
                Monomial::from_pauli(&layout, p, Complex64::new(0.5, 0.0)),
            ],
        })
        .collect()
}

fn projected_weight(factors: &[SparseOperator], psi: &[Complex64]) -> f64 {
    let norm = crate::ops::norm_sqr(psi);
    let mut v = psi.to_vec();
    for f in factors {
        v = f.apply(&v);
    }
    crate::ops::norm_sqr(&v) / norm
}

pub fn fidelity_subsystem(
    psi: &StateVector,
    code: &StabilizerCode,
    logical: LogicalState,
) -> Result<f64, MetricError> {
    check_dims(psi.n_register, code.n_qubits)?;
    let factors = projector_factors(code, logical, psi.n_relays);
    Ok(projected_weight(&factors, &psi.amplitudes))
}

/// Precomputed fidelity functional for repeated evaluation along trajectories.
#[derive(Debug, Clone)]
pub enum FidelityEvaluator {
    Strict { n_relays: usize, register: Vec<Complex64> },
    Subsystem { factors: Vec<SparseOperator> },
}

impl FidelityEvaluator {
    pub fn new(kind: MetricKind, code: &StabilizerCode, logical: LogicalState, psi0: &StateVector) -> Self {
        match kind {
            MetricKind::Strict => FidelityEvaluator::Strict {
                n_relays: psi0.n_relays,
                register: register_factor(psi0),
            },
            MetricKind::Subsystem => FidelityEvaluator::Subsystem {
                factors: projector_factors(code, logical, psi0.n_relays),
            },
        }
    }

    pub fn evaluate(&self, psi: &[Complex64]) -> f64 {
        match self {
            FidelityEvaluator::Strict { n_relays, register } => strict_overlap(psi, *n_relays, register),
            FidelityEvaluator::Subsystem { factors } => projected_weight(factors, psi),
        }
    }
}

/// Number of grid steps spanned by a window of width `tau`.
pub fn window_steps(tau: f64, step: f64) -> usize {
    libm::floor(tau / step + 1e-9) as usize
}

/// `F*[i] = max F[j]` over `t_j ∈ [t_i, t_i + tau]`, for `t_i ≤ T - tau` only.
pub fn f_star(trace: &[f64], step: f64, tau: f64) -> Result<Vec<f64>, MetricError> {
    let horizon = step * trace.len().saturating_sub(1) as f64;
    if !(tau >= 0.0) || tau > horizon + 1e-9 * step.max(1.0) || trace.is_empty() {
        return Err(MetricError::InvalidWindow { tau, horizon });
    }
    let w = window_steps(tau, step).min(trace.len() - 1);
    let n_out = trace.len() - w;
    let mut out = Vec::with_capacity(n_out);
    let mut window: VecDeque<usize> = VecDeque::new();
    for j in 0..trace.len() {
        while let Some(&back) = window.back() {
            if trace[back] <= trace[j] {
                window.pop_back();
            } else {
                break;
            }
        }
        window.push_back(j);
        if j >= w {
            let i = j - w;
            while window.front().is_some_and(|&f| f < i) {
                window.pop_front();
            }
            out.push(trace[*window.front().expect("window holds j")]);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub time_grid: Vec<f64>,
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub n_trajectories: usize,
    pub seed: u64,
}

/// Which series of a record to average: metric index and optional `F*` window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSelector {
    pub metric: usize,
    pub tau: Option<f64>,
}

impl MetricSelector {
    pub fn fidelity(metric: usize) -> Self {
        Self { metric, tau: None }
    }

    pub fn windowed(metric: usize, tau: f64) -> Self {
        Self {
            metric,
            tau: Some(tau),
        }
    }
}

/// Pointwise mean and standard error of equal-length series, summed in order.
pub fn mean_and_error(series: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>), MetricError> {
    let first = series.first().ok_or(MetricError::Empty)?;
    let len = first.len();
    if series.iter().any(|s| s.len() != len) {
        return Err(MetricError::GridMismatch);
    }
    let n = series.len() as f64;
    let mut mean = alloc::vec![0.0; len];
    for s in series {
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut se = alloc::vec![0.0; len];
    if series.len() > 1 {
        for s in series {
            for ((e, v), m) in se.iter_mut().zip(s).zip(&mean) {
                *e += (v - m) * (v - m);
            }
        }
        for e in &mut se {
            *e = libm::sqrt(*e / (n - 1.0)) / libm::sqrt(n);
        }
    }
    Ok((mean, se))
}

pub fn ensemble_average(
    records: &[TrajectoryRecord],
    selector: MetricSelector,
) -> Result<EnsembleResult, MetricError> {
    let first = records.first().ok_or(MetricError::Empty)?;
    if records.iter().any(|r| r.time_grid != first.time_grid) {
        return Err(MetricError::GridMismatch);
    }
    let step = if first.time_grid.len() > 1 {
        first.time_grid[1] - first.time_grid[0]
    } else {
        1.0
    };
    let mut series = Vec::with_capacity(records.len());
    for r in records {
        let trace = r
            .fidelity
            .get(selector.metric)
            .ok_or(MetricError::MetricIndex(selector.metric))?;
        series.push(match selector.tau {
            None => trace.clone(),
            Some(tau) => f_star(trace, step, tau)?,
        });
    }
    let (mean, std_error) = mean_and_error(&series)?;
    let time_grid = first.time_grid[..mean.len()].to_vec();
    Ok(EnsembleResult {
        time_grid,
        mean,
        std_error,
        n_trajectories: records.len(),
        seed: 0,
    })
}
