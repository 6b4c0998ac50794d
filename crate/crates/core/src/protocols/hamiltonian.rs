use serde::{Deserialize, Serialize};

use super::{HamiltonianMode, ProtocolStep, QubitModel};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{Complex64, ComplexMatrix};
use crate::synthesis::{DrivePlan, DriveSample};
use crate::tolerances::TOL;

/// Complex amplitude `Ω_q e^{iφ_q}` of the `|e⟩_q⟨g|` drive on one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitDrive {
    pub qubit: usize,
    pub amplitude: Complex64,
}

/// Reads the per-qubit drives off the synthesized layout couplings.
///
/// A coupling `⟨e_m|H|n⟩` between embedded product states that differ in
/// qubit `q` equals the drive amplitude when `|e_m⟩` has `q` excited and its
/// conjugate otherwise. All channels of one qubit must agree.
pub fn qubit_drives(step: &ProtocolStep, model: &QubitModel, sample: &DriveSample) -> Result<Vec<QubitDrive>> {
    let layout = step.layout;
    let scale = sample.omega.abs().max(1.0);
    if sample.detuning.abs() > 1e-12 * scale {
        return Err(Error::Invalid(format!(
            "step `{}` needs detuning {:.3e} at t = {}, which a qubit drive cannot supply",
            step.name, sample.detuning, sample.t
        )));
    }
    if sample.auxiliary.is_some() {
        return Err(Error::Invalid(format!("step `{}` carries an auxiliary drive", step.name)));
    }
    let mut found: Vec<Option<Complex64>> = vec![None; model.qubits];
    for m in 0..layout.assistant_levels() {
        for n in 0..layout.working_levels() {
            let c = sample.coupling(m, n);
            let a = step.embedding[layout.assistant_index(m)];
            let w = step.embedding[layout.working_index(n)];
            let flip = a ^ w;
            if flip.count_ones() != 1 {
                if c.norm() > TOL.drive_consistency * scale {
                    return Err(Error::Invalid(format!(
                        "step `{}` couples {} to {}, which differ in more than one qubit",
                        step.name,
                        model.label(a),
                        model.label(w)
                    )));
                }
                continue;
            }
            let q = model.qubits - 1 - flip.trailing_zeros() as usize;
            if !step.drives.contains(&q) {
                if c.norm() > TOL.drive_consistency * scale {
                    return Err(Error::Invalid(format!("step `{}` needs a drive on undriven qubit {}", step.name, q + 1)));
                }
                continue;
            }
            let d = if model.is_excited(a, q) { c } else { c.conj() };
            match found[q] {
                None => found[q] = Some(d),
                Some(prev) if (prev - d).norm() <= TOL.drive_consistency * scale => {}
                Some(prev) => {
                    return Err(Error::Invalid(format!(
                        "step `{}` asks qubit {} for two drive amplitudes ({prev} and {d}) at t = {}",
                        step.name,
                        q + 1,
                        sample.t
                    )))
                }
            }
        }
    }
    Ok(step
        .drives
        .iter()
        .map(|&q| QubitDrive {
            qubit: q,
            amplitude: found[q].unwrap_or_default(),
        })
        .collect())
}

/// `s + Σ z_p` over the active neighbours `p` of `qubit` in product state
/// `ground` (which has `qubit` in `|g⟩`); the `|e⟩_q⟨g|` term then oscillates at `J` times this.
fn detuning_units(step: &ProtocolStep, model: &QubitModel, qubit: usize, ground: usize) -> i32 {
    let mut k = step.frequency.sign();
    for &(a, b) in &step.couplings {
        let partner = if a == qubit {
            b
        } else if b == qubit {
            a
        } else {
            continue;
        };
        k += if model.is_excited(ground, partner) { 1 } else { -1 };
    }
    k
}

/// The step Hamiltonian in the full register at `t`.
///
/// The effective form keeps the resonant drive terms. The rotating-frame form
/// keeps every term with its phase `e^{iJkτ}`, where `τ` is the time since the
/// step began.
pub fn build_step_hamiltonian(step: &ProtocolStep, model: &QubitModel, plan: &DrivePlan, t: f64) -> Result<ComplexMatrix> {
    let sample = plan.sample(t)?;
    let drives = qubit_drives(step, model, &sample)?;
    let j = match step.mode {
        HamiltonianMode::Effective => 0.0,
        HamiltonianMode::RotatingFrame => model.coupling_strength().ok_or_else(|| {
            Error::Invalid("rotating-frame mode needs a coupling scale (set omega_t or j_t)".into())
        })?,
    };
    let tau = t - step.start;
    let dim = model.dim();
    let mut h = ComplexMatrix::zeros(dim, dim);
    for d in drives {
        if d.amplitude == Complex64::default() {
            continue;
        }
        let bit = 1 << (model.qubits - 1 - d.qubit);
        for ground in (0..dim).filter(|i| i & bit == 0) {
            let k = detuning_units(step, model, d.qubit, ground);
            let value = match step.mode {
                HamiltonianMode::Effective if k != 0 => continue,
                HamiltonianMode::Effective => d.amplitude,
                HamiltonianMode::RotatingFrame => d.amplitude * Complex64::from_polar(1.0, j * k as f64 * tau),
            };
            h.set_hermitian_pair(ground | bit, ground, value);
        }
    }
    Ok(h)
}

/// Largest `|Ω_q|` over the points and midpoints of `grid`.
pub fn peak_rabi(step: &ProtocolStep, model: &QubitModel, plan: &DrivePlan, grid: &TimeGrid) -> Result<f64> {
    let mut peak: f64 = 0.0;
    for i in 0..grid.len() {
        let mut ts = vec![grid.point(i)];
        if i < grid.steps() {
            ts.push(grid.midpoint(i));
        }
        for t in ts {
            for d in qubit_drives(step, model, &plan.sample(t)?)? {
                peak = peak.max(d.amplitude.norm());
            }
        }
    }
    Ok(peak)
}
