use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{ComplexMatrix, DensityMatrix, I, ONE};
use crate::tolerances::TOL;

use super::closed::check_hamiltonian;
use super::{Diagnostics, Trajectory};

/// A jump operator `o` with rate `κ`, contributing `(κ/2)(2oρo† − o†oρ − ρo†o)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dissipator {
    jump: ComplexMatrix,
    rate: f64,
}

impl Dissipator {
    pub fn new(jump: ComplexMatrix, rate: f64) -> Result<Self> {
        if !(rate >= 0.0) {
            return Err(Error::Invalid(format!("dissipation rate {rate} must be non-negative")));
        }
        if !jump.is_square() {
            return Err(Error::Dimension("jump operator must be square".into()));
        }
        Ok(Self { jump, rate })
    }

    pub fn jump(&self) -> &ComplexMatrix {
        &self.jump
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

/// Precomputed `(√κ·o, √κ·o†, (κ/2)·o†o)` for the right-hand side.
struct Channel {
    jump: ComplexMatrix,
    jump_dag: ComplexMatrix,
    half_decay: ComplexMatrix,
}

fn channels(dissipators: &[Dissipator], dim: usize) -> Result<Vec<Channel>> {
    dissipators
        .iter()
        .filter(|d| d.rate > 0.0)
        .map(|d| {
            if d.jump.rows() != dim {
                return Err(Error::Dimension(format!(
                    "jump operator is {}x{}, state dimension is {dim}",
                    d.jump.rows(),
                    d.jump.cols()
                )));
            }
            let jump = d.jump.scale_real(d.rate.sqrt());
            let jump_dag = jump.adjoint();
            let half_decay = jump_dag.matmul_unchecked(&jump).scale_real(0.5);
            Ok(Channel {
                jump,
                jump_dag,
                half_decay,
            })
        })
        .collect()
}

/// `−i[H, ρ] + Σ (oρo† − ½{o†o, ρ})` with the rate folded into `o`.
fn rhs(h: &ComplexMatrix, rho: &ComplexMatrix, chans: &[Channel]) -> ComplexMatrix {
    let hr = h.matmul_unchecked(rho);
    let rh = rho.matmul_unchecked(h);
    let mut out = (&hr - &rh).scale(-I);
    for c in chans {
        out += &c.jump.matmul_unchecked(rho).matmul_unchecked(&c.jump_dag);
        let anti = &c.half_decay.matmul_unchecked(rho) + &rho.matmul_unchecked(&c.half_decay);
        out = &out - &anti;
    }
    out
}

fn axpy(a: &ComplexMatrix, s: f64, b: &ComplexMatrix) -> ComplexMatrix {
    a + &b.scale_real(s)
}

/// Integrates the master equation by classical RK4 and hands every grid state
/// to `observe`. Fails if the trace drifts by more than the fatal threshold or
/// a checkpoint finds an eigenvalue below the positivity tolerance.
pub fn propagate_lindblad_observed<F, O>(
    hamiltonian: F,
    dissipators: &[Dissipator],
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    mut observe: O,
) -> Result<Diagnostics>
where
    F: Fn(f64) -> Result<ComplexMatrix>,
    O: FnMut(usize, f64, &DensityMatrix) -> Result<()>,
{
    let dim = rho0.dim();
    let chans = channels(dissipators, dim)?;
    let dt = grid.dt();
    let checkpoint = (grid.steps() / 20).max(1);
    let mut rho = rho0.matrix().clone();
    let mut diag = Diagnostics {
        min_eigenvalue: Some(rho0.min_eigenvalue()),
        ..Diagnostics::default()
    };
    observe(0, grid.point(0), rho0)?;

    let mut h_start = hamiltonian(grid.point(0))?;
    check_hamiltonian(&h_start, dim, grid.point(0))?;
    for i in 0..grid.steps() {
        let t = grid.point(i);
        let h_mid = hamiltonian(grid.midpoint(i))?;
        check_hamiltonian(&h_mid, dim, grid.midpoint(i))?;
        let h_end = hamiltonian(grid.point(i + 1))?;
        check_hamiltonian(&h_end, dim, grid.point(i + 1))?;

        let k1 = rhs(&h_start, &rho, &chans);
        let k2 = rhs(&h_mid, &axpy(&rho, 0.5 * dt, &k1), &chans);
        let k3 = rhs(&h_mid, &axpy(&rho, 0.5 * dt, &k2), &chans);
        let k4 = rhs(&h_end, &axpy(&rho, dt, &k3), &chans);
        let mut incr = &k1 + &k4;
        incr += &(&k2 + &k3).scale_real(2.0);
        rho = axpy(&rho, dt / 6.0, &incr).hermitian_part();
        h_start = h_end;

        let drift = (rho.trace() - ONE).norm();
        diag.max_trace_drift = diag.max_trace_drift.max(drift);
        if drift > TOL.trace_drift_fatal {
            return Err(Error::TraceDrift { t: t + dt, drift });
        }
        let state = DensityMatrix::from_matrix_unchecked(rho.clone());
        if (i + 1) % checkpoint == 0 || i + 1 == grid.steps() {
            let ev = state.min_eigenvalue();
            diag.min_eigenvalue = Some(diag.min_eigenvalue.map_or(ev, |m| m.min(ev)));
            if ev < -TOL.positivity {
                return Err(Error::Diagnostic(format!(
                    "density matrix eigenvalue {ev:e} at t = {}; increase the step count",
                    t + dt
                )));
            }
        }
        observe(i + 1, grid.point(i + 1), &state)?;
    }
    Ok(diag)
}

/// As [`propagate_lindblad_observed`], keeping every grid state.
pub fn propagate_lindblad<F>(
    hamiltonian: F,
    dissipators: &[Dissipator],
    rho0: &DensityMatrix,
    grid: &TimeGrid,
) -> Result<Trajectory<DensityMatrix>>
where
    F: Fn(f64) -> Result<ComplexMatrix>,
{
    let mut states = Vec::with_capacity(grid.len());
    let diagnostics = propagate_lindblad_observed(hamiltonian, dissipators, rho0, grid, |_, _, rho| {
        states.push(rho.clone());
        Ok(())
    })?;
    Ok(Trajectory {
        times: grid.times(),
        states,
        diagnostics,
    })
}

