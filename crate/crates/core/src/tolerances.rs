//! Numerical thresholds shared by the library, its tests and the CLI.

/// Every tolerance used by the crate, gathered in one record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative anti-Hermitian part allowed on a Hermitian-tagged matrix.
    pub hermitian: f64,
    /// Hermiticity required of a Hamiltonian handed to a propagator (relative).
    pub hamiltonian_hermitian: f64,
    /// |‖ψ‖ − 1| allowed on a normalized state.
    pub state_norm: f64,
    /// Trace drift tolerated on a density matrix after propagation.
    pub trace_drift: f64,
    /// Trace drift above which a Lindblad run is rejected as under-resolved.
    pub trace_drift_fatal: f64,
    /// Most negative eigenvalue tolerated on a propagated density matrix.
    pub positivity: f64,
    /// Gram/completeness error allowed on an ancillary frame.
    pub frame_orthonormality: f64,
    /// Von Neumann residual allowed on a synthesized passage, relative to ‖H‖_F.
    pub passage_residual: f64,
    /// Dark-state annihilation and block-form error, relative to ‖H‖_F.
    pub dark_state: f64,
    /// Smallest |sin(drive phase + α)| accepted where the mixing angle moves.
    pub singular_sine: f64,
    /// |φ̇| below which the mixing angle counts as stationary.
    pub stationary_rate: f64,
    /// Relative step used for finite-difference derivatives of sampled schedules.
    pub sampled_fd_step: f64,
    /// Default relative step for finite-difference residuals.
    pub residual_fd_step: f64,
    /// Relative mismatch allowed between channels that share one qubit drive.
    pub drive_consistency: f64,
}

pub const TOL: Tolerances = Tolerances {
    hermitian: 1e-12,
    hamiltonian_hermitian: 1e-10,
    state_norm: 1e-10,
    trace_drift: 1e-7,
    trace_drift_fatal: 1e-6,
    positivity: 1e-7,
    frame_orthonormality: 1e-12,
    passage_residual: 1e-8,
    dark_state: 1e-10,
    singular_sine: 1e-3,
    stationary_rate: 1e-12,
    sampled_fd_step: 1e-6,
    residual_fd_step: 1e-6,
    drive_consistency: 1e-9,
};
