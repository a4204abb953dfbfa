//! Trajectory ensembles fanned across a rayon pool.

use qmem_core::dynamics::{run_trajectory, trajectory_rng};
use qmem_core::metrics::FidelityEvaluator;
use qmem_core::{CompiledModel, DynamicsError, StateVector, TrajectoryRecord, TrajectorySettings};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("could not start the worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Worker count used when none is given.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Trajectories `0..n` of the ensemble with master seed `seed`.
///
/// Trajectory `i` always draws from stream `(seed, i)` and the result is in
/// index order, so the output does not depend on `workers`.
pub fn run_parallel(
    model: &CompiledModel,
    psi0: &StateVector,
    settings: &TrajectorySettings,
    metrics: &[FidelityEvaluator],
    n: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<TrajectoryRecord>, EnsembleError> {
    if n == 0 {
        return Err(DynamicsError::NoTrajectories.into());
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
    let records = pool.install(|| {
        (0..n as u64)
            .into_par_iter()
            .map(|i| run_trajectory(model, psi0, settings, metrics, &mut trajectory_rng(seed, i)))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(records)
}
