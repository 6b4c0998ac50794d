use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{expm, Complex64, ComplexMatrix, StateVector};
use crate::tolerances::TOL;

use super::{Diagnostics, Trajectory};

/// Rejects `h` unless it is square, of dimension `dim` and Hermitian to tolerance.
pub(crate) fn check_hamiltonian(h: &ComplexMatrix, dim: usize, t: f64) -> Result<()> {
    if h.rows() != dim || h.cols() != dim {
        return Err(Error::Dimension(format!(
            "Hamiltonian at t = {t} is {}x{}, state dimension is {dim}",
            h.rows(),
            h.cols()
        )));
    }
    let deviation = h.hermitian_deviation();
    if deviation > TOL.hamiltonian_hermitian {
        return Err(Error::NonHermitian { t, deviation });
    }
    Ok(())
}

/// Step propagator `exp(−i H(t_mid) dt)` for interval `i`.
fn midpoint_step<F>(hamiltonian: &F, grid: &TimeGrid, i: usize, dim: usize) -> Result<ComplexMatrix>
where
    F: Fn(f64) -> Result<ComplexMatrix>,
{
    let t = grid.midpoint(i);
    let h = hamiltonian(t)?;
    check_hamiltonian(&h, dim, t)?;
    expm(&h.scale(Complex64::new(0.0, -grid.dt())))
}

/// Integrates `i dψ/dt = H(t) ψ` with the exponential midpoint rule and hands
/// every grid state to `observe`.
pub fn propagate_schrodinger_observed<F, O>(
    hamiltonian: F,
    psi0: &StateVector,
    grid: &TimeGrid,
    mut observe: O,
) -> Result<Diagnostics>
where
    F: Fn(f64) -> Result<ComplexMatrix>,
    O: FnMut(usize, f64, &StateVector) -> Result<()>,
{
    if !psi0.is_normalized() {
        return Err(Error::Invalid(format!("initial state has norm {}", psi0.norm())));
    }
    let dim = psi0.dim();
    observe(0, grid.point(0), psi0)?;
    let mut psi = psi0.clone();
    let mut drift: f64 = 0.0;
    for i in 0..grid.steps() {
        psi = midpoint_step(&hamiltonian, grid, i, dim)?.apply(&psi)?;
        drift = drift.max((psi.norm() - 1.0).abs());
        observe(i + 1, grid.point(i + 1), &psi)?;
    }
    Ok(Diagnostics {
        max_norm_drift: drift,
        ..Diagnostics::default()
    })
}

/// As [`propagate_schrodinger_observed`], keeping every grid state.
pub fn propagate_schrodinger<F>(hamiltonian: F, psi0: &StateVector, grid: &TimeGrid) -> Result<Trajectory<StateVector>>
where
    F: Fn(f64) -> Result<ComplexMatrix>,
{
    let mut states = Vec::with_capacity(grid.len());
    let diagnostics = propagate_schrodinger_observed(hamiltonian, psi0, grid, |_, _, psi| {
        states.push(psi.clone());
        Ok(())
    })?;
    Ok(Trajectory {
        times: grid.times(),
        states,
        diagnostics,
    })
}

/// The evolution operator `U(t_i, t_0)` at every grid point.
pub fn propagate_unitary<F>(hamiltonian: F, dim: usize, grid: &TimeGrid) -> Result<Vec<ComplexMatrix>>
where
    F: Fn(f64) -> Result<ComplexMatrix>,
{
    let mut out = Vec::with_capacity(grid.len());
    let mut u = ComplexMatrix::identity(dim);
    out.push(u.clone());
    for i in 0..grid.steps() {
        u = midpoint_step(&hamiltonian, grid, i, dim)?.matmul(&u)?;
        out.push(u.clone());
    }
    Ok(out)
}
