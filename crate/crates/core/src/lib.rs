//! Autonomous quantum memory models: Pauli algebra, code catalog, model
//! assembly, probe routing, trajectory dynamics and fidelity metrics.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod builder;
pub mod codes;
pub mod dense;
pub mod dynamics;
pub mod metrics;
pub mod ops;
pub mod pauli;
pub mod routing;

pub use builder::{assemble_model, BuildError, MemoryModel, ModelParams, NoiseKind};
pub use codes::{catalog_get, CodeError, ErrorClass, LogicalState, StabilizerCode, CATALOG};
pub use dynamics::{
    encode_initial_state, integrate_master_equation, run_ensemble, run_trajectory, CompiledModel, DynamicsError,
    StateVector, TrajectoryRecord, TrajectorySettings,
};
pub use metrics::{f_star, fidelity_strict, fidelity_subsystem, EnsembleResult, MetricKind, MetricSpec};
pub use pauli::{Pauli, PauliError, PauliString};
pub use routing::{optimize_route, score_route, RouteReport, Strategy};
