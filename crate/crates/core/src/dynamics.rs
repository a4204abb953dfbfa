//! Quantum-jump trajectories (matrix-free) and a dense master-equation integrator.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::builder::MemoryModel;
use crate::codes::{LogicalState, StabilizerCode};
use crate::dense::{operator_matrix, CsrMatrix, DenseMatrix};
use crate::metrics::{ensemble_average, EnsembleResult, FidelityEvaluator, MetricError, MetricSelector};
use crate::ops::{inner, norm_sqr, Layout, Monomial, SparseOperator};

/// Largest dimension accepted by the density-matrix integrator.
pub const MAX_DENSE_DIM: usize = 1 << 10;

/// Trace drift tolerated by the density-matrix integrator.
pub const TRACE_TOLERANCE: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("non-finite amplitudes at t = {time}; the step is too large")]
    NonFinite { time: f64 },
    #[error("total jump weight vanished at t = {time}")]
    ZeroJumpWeight { time: f64 },
    #[error("invalid time settings: {0}")]
    InvalidSettings(&'static str),
    #[error("dimension {dim} exceeds the dense limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },
    #[error("trace drifted to {trace} at t = {time}; the step is too large")]
    TraceDrift { time: f64, trace: f64 },
    #[error("state dimension {state} does not match the model dimension {model}")]
    DimensionMismatch { state: usize, model: usize },
    #[error("logical projector annihilates every basis state")]
    EmptyCodespace,
    #[error("ensemble needs at least one trajectory")]
    NoTrajectories,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub n_register: usize,
    pub n_relays: usize,
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn layout(&self) -> Layout {
        Layout::new(self.n_register, self.n_relays)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    pub fn normalize(&mut self) {
        let s = 1.0 / libm::sqrt(self.norm_sqr());
        for a in &mut self.amplitudes {
            *a *= s;
        }
    }

    /// `register ⊗ relays` from factor amplitudes.
    pub fn product(n_register: usize, register: &[Complex64], n_relays: usize, relays: &[Complex64]) -> Self {
        let mut amplitudes = Vec::with_capacity(register.len() * relays.len());
        for r in register {
            for s in relays {
                amplitudes.push(r * s);
            }
        }
        Self {
            n_register,
            n_relays,
            amplitudes,
        }
    }

    pub fn density_matrix(&self) -> DenseMatrix {
        DenseMatrix::outer(&self.amplitudes, &self.amplitudes)
    }
}

/// Codeword for `logical` with every relay in `h`.
///
/// The register factor is the normalized projection of the first computational
/// basis state that the logical projector does not annihilate.
pub fn encode_initial_state(
    code: &StabilizerCode,
    logical: LogicalState,
    n_relays: usize,
) -> Result<StateVector, DynamicsError> {
    let layout = Layout::new(code.n_qubits, 0);
    let half = Complex64::new(0.5, 0.0);
    let factors: Vec<SparseOperator> = code
        .logical_projector(logical)
        .factors
        .iter()
        .map(|p| SparseOperator {
            layout,
            terms: vec![Monomial::identity(half), Monomial::from_pauli(&layout, p, half)],
        })
        .collect();
    let dim = layout.dim();
    for seed in 0..dim {
        let mut v = vec![ZERO; dim];
        v[seed] = Complex64::new(1.0, 0.0);
        for f in &factors {
            v = f.apply(&v);
        }
        let n = norm_sqr(&v);
        if n > 1e-12 {
            let s = 1.0 / libm::sqrt(n);
            for a in &mut v {
                *a *= s;
            }
            let mut relays = vec![ZERO; 1 << n_relays];
            relays[(1 << n_relays) - 1] = Complex64::new(1.0, 0.0);
            return Ok(StateVector::product(code.n_qubits, &v, n_relays, &relays));
        }
    }
    Err(DynamicsError::EmptyCodespace)
}

/// Model operators in matrix-free form together with the simplified jump weights.
#[derive(Debug, Clone)]
pub struct CompiledModel {
    pub layout: Layout,
    pub hamiltonian: SparseOperator,
    pub lindblads: Vec<SparseOperator>,
    /// `L_i† L_i`
    pub jump_weights: Vec<SparseOperator>,
    /// `-iH - ½(Σ L†L - c·I)`, with `c` the identity part of `Σ L†L`.
    pub drift: SparseOperator,
    /// `c`: the squared norm decays by the extra factor `exp(-c t)`.
    pub uniform_decay: f64,
    split_weights: Vec<SplitWeight>,
}

impl CompiledModel {
    pub fn new(model: &MemoryModel) -> Self {
        let layout = Layout::new(model.n_register, model.n_relays);
        let mut hamiltonian = SparseOperator::zero(layout);
        for op in &model.hamiltonian {
            hamiltonian = hamiltonian.add(&SparseOperator::from_operator(layout, op));
        }
        let hamiltonian = hamiltonian.simplified();
        let lindblads: Vec<SparseOperator> = model
            .lindblads
            .iter()
            .map(|op| SparseOperator::from_operator(layout, op).simplified())
            .collect();
        let jump_weights: Vec<SparseOperator> = lindblads.iter().map(|l| l.adjoint().mul(l)).collect();
        let mut total = SparseOperator::zero(layout);
        for k in &jump_weights {
            total = total.add(k);
        }
        let total = total.simplified();
        let uniform_decay = total.identity_coefficient().re;
        let drift = hamiltonian
            .clone()
            .scaled(Complex64::new(0.0, -1.0))
            .add(&total.without_identity().scaled(Complex64::new(-0.5, 0.0)))
            .simplified();
        Self {
            layout,
            hamiltonian,
            lindblads,
            split_weights: jump_weights.iter().map(SplitWeight::new).collect(),
            drift,
            uniform_decay,
            jump_weights,
        }
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// Step with `‖drift‖·dt ≤ 0.05`, using a Schur-test norm bound.
    pub fn default_dt(&self) -> f64 {
        let bound = self.drift.norm_bound();
        if bound > 0.0 {
            0.05 / bound
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySettings {
    pub t_final: f64,
    pub dt: f64,
    pub sample_dt: f64,
}

impl TrajectorySettings {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(DynamicsError::InvalidSettings("horizon must be positive"));
        }
        if !(self.dt > 0.0) {
            return Err(DynamicsError::InvalidSettings("dt must be positive"));
        }
        if !(self.sample_dt > 0.0) || self.sample_dt > self.t_final * (1.0 + 1e-12) {
            return Err(DynamicsError::InvalidSettings("sample_dt must lie in (0, T]"));
        }
        if self.dt > self.sample_dt * (1.0 + 1e-12) {
            return Err(DynamicsError::InvalidSettings("dt must not exceed sample_dt"));
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        libm::floor(self.t_final / self.sample_dt + 1e-9) as usize + 1
    }

    pub fn time_grid(&self) -> Vec<f64> {
        (0..self.n_samples()).map(|k| k as f64 * self.sample_dt).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub time: f64,
    /// 0-based index into the model's Lindblad list.
    pub channel: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub time_grid: Vec<f64>,
    /// One series per metric, sampled on `time_grid`.
    pub fidelity: Vec<Vec<f64>>,
    pub jumps: Vec<Jump>,
}

/// Independent random stream for trajectory `index` of an ensemble.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Jump weight `L†L` split into relay-diagonal monomials, evaluated from
/// relay-slice norms, and a general remainder.
#[derive(Debug, Clone)]
struct SplitWeight {
    diagonal: Vec<(u64, u64, f64)>,
    rest: SparseOperator,
}

impl SplitWeight {
    fn new(k: &SparseOperator) -> Self {
        let mut diagonal = Vec::new();
        let mut rest = SparseOperator::zero(k.layout);
        for m in &k.terms {
            if m.flip == 0 && m.sign == 0 && m.req == m.set {
                diagonal.push((m.mask, m.req, m.coeff.re));
            } else {
                rest.terms.push(*m);
            }
        }
        Self { diagonal, rest }
    }

    fn weight(&self, psi: &[Complex64], slices: &[f64]) -> f64 {
        let mut w = 0.0;
        for &(mask, req, c) in &self.diagonal {
            let mut acc = 0.0;
            for (r, n) in slices.iter().enumerate() {
                if r as u64 & mask == req {
                    acc += n;
                }
            }
            w += c * acc;
        }
        if !self.rest.terms.is_empty() {
            w += self.rest.expectation(psi).re;
        }
        w
    }
}

/// Squared norm of each relay configuration's register slice.
fn relay_slices(psi: &[Complex64], n_relays: usize, out: &mut [f64]) {
    out.fill(0.0);
    let mask = (1usize << n_relays) - 1;
    for (i, a) in psi.iter().enumerate() {
        out[i & mask] += a.norm_sqr();
    }
}

/// Fourth-order Taylor step of `dψ/dt = D ψ`; for a time-independent linear
/// drift this is the classical RK4 step. `w[k-1] = D^k ψ / k!`.
struct Stepper {
    w: [Vec<Complex64>; 4],
}

impl Stepper {
    fn new(dim: usize) -> Self {
        Self {
            w: [vec![ZERO; dim], vec![ZERO; dim], vec![ZERO; dim], vec![ZERO; dim]],
        }
    }

    fn expand(&mut self, d: &SparseOperator, psi: &[Complex64]) {
        let [w1, w2, w3, w4] = &mut self.w;
        apply_into(d, psi, w1, 1.0);
        apply_into(d, w1, w2, 0.5);
        apply_into(d, w2, w3, 1.0 / 3.0);
        apply_into(d, w3, w4, 0.25);
    }

    fn eval(&self, psi: &[Complex64], s: f64, out: &mut [Complex64]) {
        let [w1, w2, w3, w4] = &self.w;
        for (i, o) in out.iter_mut().enumerate() {
            *o = psi[i] + (w1[i] + (w2[i] + (w3[i] + w4[i] * s) * s) * s) * s;
        }
    }

    /// Coefficients of `‖ψ(s)‖²` as a polynomial in `s`.
    fn norm_polynomial(&self, psi: &[Complex64]) -> [f64; 9] {
        let v: [&[Complex64]; 5] = [psi, &self.w[0], &self.w[1], &self.w[2], &self.w[3]];
        let mut p = [0.0; 9];
        for j in 0..5 {
            p[2 * j] += norm_sqr(v[j]);
            for k in j + 1..5 {
                p[j + k] += 2.0 * inner(v[j], v[k]).re;
            }
        }
        p
    }
}

fn apply_into(op: &SparseOperator, input: &[Complex64], out: &mut [Complex64], scale: f64) {
    out.fill(ZERO);
    op.apply_add(input, out, Complex64::new(scale, 0.0));
}

fn polynomial(p: &[f64; 9], s: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * s + c)
}

/// Single quantum-jump trajectory.
///
/// Between jumps the unnormalized state follows the non-Hermitian drift. A jump
/// fires when the squared norm falls to a uniform threshold; the crossing time
/// inside a step is located by root finding on the step length.
pub fn run_trajectory<R: Rng + ?Sized>(
    model: &CompiledModel,
    psi0: &StateVector,
    settings: &TrajectorySettings,
    metrics: &[FidelityEvaluator],
    rng: &mut R,
) -> Result<TrajectoryRecord, DynamicsError> {
    settings.validate()?;
    let dim = model.dim();
    if psi0.dim() != dim {
        return Err(DynamicsError::DimensionMismatch {
            state: psi0.dim(),
            model: dim,
        });
    }
    let time_grid = settings.time_grid();
    let n_samples = time_grid.len();
    let mut fidelity: Vec<Vec<f64>> = metrics.iter().map(|_| Vec::with_capacity(n_samples)).collect();
    let mut jumps = Vec::new();

    let mut psi = psi0.amplitudes.clone();
    let s0 = 1.0 / libm::sqrt(norm_sqr(&psi));
    for a in &mut psi {
        *a *= s0;
    }
    let mut trial = vec![ZERO; dim];
    let mut stepper = Stepper::new(dim);
    let mut slices = vec![0.0; 1 << model.layout.n_relays];
    let mut weights = vec![0.0; model.lindblads.len()];
    let c = model.uniform_decay;

    let record = |psi: &[Complex64], fidelity: &mut Vec<Vec<f64>>| {
        for (m, series) in metrics.iter().zip(fidelity.iter_mut()) {
            series.push(m.evaluate(psi));
        }
    };
    record(&psi, &mut fidelity);

    let mut t = 0.0;
    // Time since the last jump; the state was normalized then.
    let mut since = 0.0;
    let mut log_threshold = draw_log_threshold(rng);
    let mut next = 1;
    while next < n_samples {
        let t_sample = time_grid[next];
        let h = (t_sample - t).min(settings.dt);
        let reaches_sample = h >= t_sample - t;
        stepper.expand(&model.drift, &psi);
        stepper.eval(&psi, h, &mut trial);
        let log_norm = libm::log(norm_sqr(&trial)) - c * (since + h);
        if !log_norm.is_finite() {
            return Err(DynamicsError::NonFinite { time: t + h });
        }
        if log_norm > log_threshold {
            core::mem::swap(&mut psi, &mut trial);
            t = if reaches_sample { t_sample } else { t + h };
            since += h;
            if reaches_sample {
                record(&psi, &mut fidelity);
                next += 1;
            }
            continue;
        }

        let poly = stepper.norm_polynomial(&psi);
        let s = find_crossing(&poly, c, since, h, log_threshold);
        stepper.eval(&psi, s, &mut trial);
        core::mem::swap(&mut psi, &mut trial);
        t += s;

        relay_slices(&psi, model.layout.n_relays, &mut slices);
        for (w, k) in weights.iter_mut().zip(&model.split_weights) {
            *w = k.weight(&psi, &slices).max(0.0);
        }
        let channel = choose_channel(&weights, rng).ok_or(DynamicsError::ZeroJumpWeight { time: t })?;
        apply_into(&model.lindblads[channel], &psi, &mut trial, 1.0);
        let n = norm_sqr(&trial);
        if !(n > 0.0) || !n.is_finite() {
            return Err(DynamicsError::NonFinite { time: t });
        }
        let inv = 1.0 / libm::sqrt(n);
        for (p, v) in psi.iter_mut().zip(&trial) {
            *p = v * inv;
        }
        jumps.push(Jump { time: t, channel });
        since = 0.0;
        log_threshold = draw_log_threshold(rng);
        if reaches_sample && t_sample - t <= 1e-12 * t_sample {
            t = t_sample;
            record(&psi, &mut fidelity);
            next += 1;
        }
    }

    Ok(TrajectoryRecord {
        time_grid,
        fidelity,
        jumps,
    })
}

fn draw_log_threshold<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    libm::log(1.0 - u)
}

/// Step length in `[0, h]` at which `ln‖ψ(s)‖² - c(since + s)` meets the
/// threshold (Illinois method on the step's norm polynomial).
fn find_crossing(poly: &[f64; 9], c: f64, since: f64, h: f64, log_threshold: f64) -> f64 {
    let f = |s: f64| libm::log(polynomial(poly, s)) - c * (since + s) - log_threshold;
    let (mut a, mut fa) = (0.0, f(0.0));
    let (mut b, mut fb) = (h, f(h));
    if fa <= 0.0 {
        return 0.0;
    }
    if fb >= 0.0 || !fb.is_finite() {
        return h;
    }
    let mut side = 0i8;
    for _ in 0..200 {
        if b - a <= 1e-15 * h {
            break;
        }
        let s = (a * fb - b * fa) / (fb - fa);
        let fs = f(s);
        if fs.abs() < 1e-14 {
            return s;
        }
        if fs > 0.0 {
            a = s;
            fa = fs;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        } else {
            b = s;
            fb = fs;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        }
    }
    b
}

/// Samples channel `i` with probability `∝ weights[i]`.
fn choose_channel<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return None;
    }
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, w) in weights.iter().enumerate() {
        if *w > 0.0 {
            acc += w;
            last = Some(i);
            if u < acc {
                return Some(i);
            }
        }
    }
    last
}

/// Trajectories `range` of the ensemble with master seed `seed`, in index order.
pub fn run_trajectories(
    model: &CompiledModel,
    psi0: &StateVector,
    settings: &TrajectorySettings,
    metrics: &[FidelityEvaluator],
    seed: u64,
    range: core::ops::Range<u64>,
) -> Result<Vec<TrajectoryRecord>, DynamicsError> {
    range
        .map(|i| run_trajectory(model, psi0, settings, metrics, &mut trajectory_rng(seed, i)))
        .collect()
}

/// Mean and standard error of each metric over `n` trajectories.
pub fn run_ensemble(
    model: &CompiledModel,
    psi0: &StateVector,
    settings: &TrajectorySettings,
    metrics: &[FidelityEvaluator],
    n: usize,
    seed: u64,
) -> Result<Vec<EnsembleResult>, DynamicsError> {
    if n == 0 {
        return Err(DynamicsError::NoTrajectories);
    }
    let records = run_trajectories(model, psi0, settings, metrics, seed, 0..n as u64)?;
    summarize(&records, metrics.len(), seed)
}

/// Per-metric ensemble averages of `records`.
pub fn summarize(records: &[TrajectoryRecord], n_metrics: usize, seed: u64) -> Result<Vec<EnsembleResult>, DynamicsError> {
    (0..n_metrics)
        .map(|m| {
            let mut r = ensemble_average(records, MetricSelector::fidelity(m))?;
            r.seed = seed;
            Ok(r)
        })
        .collect()
}

/// Dense representation of a model for the density-matrix integrator.
#[derive(Debug, Clone)]
pub struct DenseModel {
    pub dim: usize,
    pub hamiltonian: DenseMatrix,
    pub lindblads: Vec<DenseMatrix>,
}

impl DenseModel {
    pub fn new(model: &MemoryModel) -> Result<Self, DynamicsError> {
        let dim = model.dimension();
        if dim > MAX_DENSE_DIM {
            return Err(DynamicsError::DimensionTooLarge {
                dim,
                limit: MAX_DENSE_DIM,
            });
        }
        let (q, n) = (model.n_register, model.n_relays);
        let mut hamiltonian = DenseMatrix::zeros(dim);
        for op in &model.hamiltonian {
            hamiltonian = hamiltonian.add(&operator_matrix(q, n, op));
        }
        let lindblads = model.lindblads.iter().map(|op| operator_matrix(q, n, op)).collect();
        Ok(Self {
            dim,
            hamiltonian,
            lindblads,
        })
    }
}

struct Liouvillian {
    h_eff: CsrMatrix,
    lindblads: Vec<CsrMatrix>,
}

impl Liouvillian {
    fn new(m: &DenseModel) -> Self {
        let mut decay = DenseMatrix::zeros(m.dim);
        for l in &m.lindblads {
            decay = decay.add(&l.adjoint().mul(l));
        }
        let h_eff = m.hamiltonian.sub(&decay.scale(Complex64::new(0.0, 0.5)));
        Self {
            h_eff: CsrMatrix::from_dense(&h_eff),
            lindblads: m.lindblads.iter().map(CsrMatrix::from_dense).collect(),
        }
    }

    /// `-i(H_eff ρ - ρ H_eff†) + Σ L ρ L†`
    fn apply(&self, rho: &DenseMatrix) -> DenseMatrix {
        let a = self.h_eff.mul_dense(rho);
        let b = self.h_eff.dense_mul_adjoint(rho);
        let mut out = a.sub(&b).scale(Complex64::new(0.0, -1.0));
        for l in &self.lindblads {
            let lr = l.mul_dense(rho);
            out = out.add(&l.dense_mul_adjoint(&lr));
        }
        out
    }
}

fn axpy(y: &DenseMatrix, a: f64, x: &DenseMatrix) -> DenseMatrix {
    DenseMatrix {
        dim: y.dim,
        data: y.data.iter().zip(&x.data).map(|(u, v)| u + v * a).collect(),
    }
}

/// RK4 integration of the Lindblad master equation, sampled every `sample_dt`.
pub fn integrate_master_equation(
    model: &MemoryModel,
    rho0: &DenseMatrix,
    settings: &TrajectorySettings,
) -> Result<Vec<DenseMatrix>, DynamicsError> {
    settings.validate()?;
    let dense = DenseModel::new(model)?;
    if rho0.dim != dense.dim {
        return Err(DynamicsError::DimensionMismatch {
            state: rho0.dim,
            model: dense.dim,
        });
    }
    let liouvillian = Liouvillian::new(&dense);
    let grid = settings.time_grid();
    let mut out = Vec::with_capacity(grid.len());
    let mut rho = rho0.clone();
    out.push(rho.clone());
    let mut t = 0.0;
    for &t_sample in &grid[1..] {
        while t < t_sample {
            let h = (t_sample - t).min(settings.dt);
            let k1 = liouvillian.apply(&rho);
            let k2 = liouvillian.apply(&axpy(&rho, 0.5 * h, &k1));
            let k3 = liouvillian.apply(&axpy(&rho, 0.5 * h, &k2));
            let k4 = liouvillian.apply(&axpy(&rho, h, &k3));
            let mut next = rho.clone();
            for i in 0..next.data.len() {
                next.data[i] += (k1.data[i] + (k2.data[i] + k3.data[i]) * 2.0 + k4.data[i]) * (h / 6.0);
            }
            rho = next.add(&next.adjoint()).scale(Complex64::new(0.5, 0.0));
            t = if h >= t_sample - t { t_sample } else { t + h };
            let tr = rho.trace().re;
            if !tr.is_finite() || (tr - rho0.trace().re).abs() > TRACE_TOLERANCE {
                return Err(DynamicsError::TraceDrift { time: t, trace: tr });
            }
        }
        out.push(rho.clone());
    }
    Ok(out)
}
