use serde::{Deserialize, Serialize};

use super::{build_step_hamiltonian, peak_rabi, HamiltonianMode, ProtocolPlan, ProtocolStep};
use crate::ancillary::build_frame;
use crate::dynamics::{
    passage_residual, propagate_lindblad_observed, propagate_schrodinger_observed, reconstruct_evolution, MetricsRecorder, QuantumState, SimulationResult,
};
use crate::error::{Error, Result};
use crate::grid::{TimeGrid, DEFAULT_STEPS};
use crate::linalg::{DensityMatrix, StateVector};
use crate::synthesis::{generated_phases, synthesize_on, DrivePlan};

/// Smallest `J / Ω_peak` accepted for a strong-coupling step in rotating-frame mode.
pub const STRONG_COUPLING_MARGIN: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub mode: HamiltonianMode,
    /// Apply the model's decay; a zero rate runs the closed system either way.
    pub noise: bool,
    pub steps_per_stage: usize,
    /// Reject rotating-frame runs with `J < 10 Ω_peak` on strong-coupling steps.
    pub enforce_strong_coupling: bool,
    /// Record the passage residual at every grid point.
    pub track_residual: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            mode: HamiltonianMode::Effective,
            noise: true,
            steps_per_stage: DEFAULT_STEPS,
            enforce_strong_coupling: true,
            track_residual: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSummary {
    pub name: String,
    pub start: f64,
    pub end: f64,
    /// Fidelity with the step's own target at its end.
    pub final_fidelity: f64,
    /// Fidelity with the next step's declared initial state.
    pub handover: Option<f64>,
    pub peak_rabi: f64,
    pub max_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolRun {
    pub result: SimulationResult,
    pub steps: Vec<StepSummary>,
}

impl ProtocolRun {
    pub fn final_fidelity(&self) -> f64 {
        self.result.final_fidelity()
    }
}

/// State the declared frame predicts at the end of `step` for its declared
/// initial state. Components outside the embedded levels are left untouched.
pub fn nominal_final_state(step: &ProtocolStep) -> Result<StateVector> {
    let grid = TimeGrid::new(step.start, step.end(), DEFAULT_STEPS)?;
    let drive = synthesize_on(step.layout, &step.schedules, &grid)?;
    let phases = generated_phases(&drive, &grid)?.select(&[0, grid.steps()]);
    let frames = [
        build_frame(step.layout, &step.schedules, step.start)?,
        build_frame(step.layout, &step.schedules, step.end())?,
    ];
    let u = reconstruct_evolution(&frames, &phases)?;
    let inside = StateVector::new(step.embedding.iter().map(|&i| step.initial.amplitudes()[i]).collect());
    let moved = u[1].apply(&inside)?;
    let mut out = step.initial.clone();
    for (k, &i) in step.embedding.iter().enumerate() {
        out.amplitudes_mut()[i] = moved.amplitudes()[k];
    }
    Ok(out)
}

enum Carried {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl Carried {
    fn fidelity(&self, target: &StateVector) -> f64 {
        match self {
            Self::Pure(psi) => psi.overlap_probability(target),
            Self::Mixed(rho) => rho.fidelity(target),
        }
    }
}

fn relative_residual(step: &ProtocolStep, drive: &DrivePlan, t: f64) -> Result<f64> {
    let h = drive.hamiltonian(t)?;
    let norm = h.frobenius_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let frame = build_frame(step.layout, &step.schedules, t)?;
    Ok(passage_residual(&frame, step.passage, &h)? / norm)
}

/// Runs the plan step by step, carrying the state across step boundaries.
/// Fidelity is measured against the target of the step in progress; at a
/// shared boundary time the earlier step's point is kept.
pub fn run_protocol(plan: &ProtocolPlan, options: &RunOptions) -> Result<ProtocolRun> {
    let model = plan.model;
    let labels = plan.label_indices()?;
    let noisy = options.noise && model.decay > 0.0;
    let dissipators = if noisy { model.dissipators()? } else { Vec::new() };
    if options.mode == HamiltonianMode::RotatingFrame && model.coupling_strength().is_none() {
        return Err(Error::Invalid("rotating-frame mode needs a coupling scale (set omega_t or j_t)".into()));
    }

    let mut carried = if noisy {
        Carried::Mixed(DensityMatrix::from_pure(plan.initial()))
    } else {
        Carried::Pure(plan.initial().clone())
    };
    let mut combined: Option<SimulationResult> = None;
    let mut summaries = Vec::with_capacity(plan.steps.len());

    for (idx, declared) in plan.steps.iter().enumerate() {
        let mut step = declared.clone();
        step.mode = options.mode;
        let grid = TimeGrid::new(step.start, step.end(), options.steps_per_stage)?;
        let drive = synthesize_on(step.layout, &step.schedules, &grid)?;
        let peak = peak_rabi(&step, &model, &drive, &grid)?;
        if options.mode == HamiltonianMode::RotatingFrame && options.enforce_strong_coupling && step.strong_coupling {
            let j = model.coupling_strength().unwrap_or(0.0);
            if j < STRONG_COUPLING_MARGIN * peak {
                return Err(Error::Invalid(format!(
                    "step `{}` needs J ≥ {STRONG_COUPLING_MARGIN}·Ω_peak = {:.4}, got J = {j}",
                    step.name,
                    STRONG_COUPLING_MARGIN * peak
                )));
            }
        }

        let hamiltonian = |t: f64| build_step_hamiltonian(&step, &model, &drive, t);
        let mut recorder = MetricsRecorder::new(&step.target, &labels, model.dim())?;
        let mut residuals = Vec::with_capacity(grid.len());
        let mut track = |t: f64| -> Result<()> {
            if options.track_residual {
                residuals.push(relative_residual(&step, &drive, t)?);
            }
            Ok(())
        };
        let last = grid.steps();
        let (diagnostics, next) = match &carried {
            Carried::Pure(psi0) => {
                let mut end = None;
                let d = propagate_schrodinger_observed(hamiltonian, psi0, &grid, |i, t, psi| {
                    recorder.record(t, psi);
                    track(t)?;
                    if i == last {
                        end = Some(psi.clone());
                    }
                    Ok(())
                })?;
                (d, Carried::Pure(end.expect("propagation reaches the last grid point")))
            }
            Carried::Mixed(rho0) => {
                let mut end = None;
                let d = propagate_lindblad_observed(hamiltonian, &dissipators, rho0, &grid, |i, t, rho| {
                    recorder.record(t, rho);
                    track(t)?;
                    if i == last {
                        end = Some(rho.clone());
                    }
                    Ok(())
                })?;
                (d, Carried::Mixed(end.expect("propagation reaches the last grid point")))
            }
        };
        carried = next;

        let max_residual = options
            .track_residual
            .then(|| residuals.iter().copied().fold(0.0, f64::max));
        let snapshot = match &carried {
            Carried::Pure(psi) => psi.snapshot(),
            Carried::Mixed(rho) => rho.snapshot(),
        };
        let mut diagnostics = diagnostics;
        diagnostics.max_residual = max_residual;
        let mut result = recorder.finish(Some(snapshot), diagnostics);
        if options.track_residual {
            result.residual = Some(residuals);
        }
        summaries.push(StepSummary {
            name: step.name.clone(),
            start: step.start,
            end: step.end(),
            final_fidelity: result.final_fidelity(),
            handover: plan.steps.get(idx + 1).map(|n| carried.fidelity(&n.initial)),
            peak_rabi: peak,
            max_residual,
        });
        match &mut combined {
            None => combined = Some(result),
            Some(acc) => acc.append(result)?,
        }
    }

    let result = combined.expect("a validated plan has steps");
    Ok(ProtocolRun {
        result,
        steps: summaries,
    })
}
