//! Adiabatic passages through dark states of multilevel quantum systems.
//!
//! The crate builds an orthonormal ancillary frame for a system of `M`
//! assistant and `N` working levels, synthesizes the couplings and detuning
//! that drive the frame's passages, propagates states under the resulting
//! Hamiltonian, and assembles multi-step entangling protocols on qubit
//! registers.

pub mod ancillary;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod grid;
pub mod linalg;
pub mod protocols;
pub mod schedules;
pub mod synthesis;
pub mod tolerances;
pub mod verify;

pub use ancillary::{build_frame, frame_derivative_check, AncillaryFrame, SubspaceLayout};
pub use dynamics::{Diagnostics, Dissipator, SimulationResult, Trajectory};
pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use linalg::{Complex64, ComplexMatrix, DensityMatrix, StateVector};
pub use protocols::{plan_bell, plan_bell_reverse, plan_ghz, run_protocol, BellBoundary, HamiltonianMode, ProtocolPlan, ProtocolRun, QubitModel, RunOptions};
pub use schedules::{ParameterSchedule, ScheduleKind, ScheduleSet, Symbol};
pub use synthesis::{synthesize_general, DrivePlan, DriveSample, GeneratedPhases};
pub use tolerances::{Tolerances, TOL};
pub use verify::{run_verify, VerifyConfig, VerifyReport};
