//! Entangling protocols for a chain of longitudinally coupled qubits.
//!
//! Each protocol is a sequence of steps. A step picks an `M+N` layout inside
//! the `2^{N_q}` product basis, synthesizes the drive for it, and reads the
//! per-qubit drive amplitudes back off the synthesized couplings.
//!
//! Product states are indexed with qubit 1 as the most significant bit and
//! `|g⟩ = 0`, `|e⟩ = 1`, so `|eg⟩` is index 2 of the two-qubit register.

mod hamiltonian;
mod plans;
mod run;

use serde::{Deserialize, Serialize};

pub use self::hamiltonian::{build_step_hamiltonian, peak_rabi, qubit_drives, QubitDrive};
pub use self::plans::{plan_bell, plan_bell_reverse, plan_ghz, BellBoundary};
pub use self::run::{nominal_final_state, run_protocol, ProtocolRun, RunOptions, StepSummary};

use crate::ancillary::SubspaceLayout;
use crate::dynamics::Dissipator;
use crate::error::{Error, Result};
use crate::linalg::{pauli, Complex64, StateVector};
use crate::schedules::{ScheduleKind, ScheduleSet, Symbol};
use crate::synthesis::synthesize_general;

/// Sample points per step at which plan validation reads the qubit drives.
const DRIVE_CHECK_POINTS: usize = 16;

/// `J/ω` used when only `ωT` is given.
pub const COUPLING_RATIO: f64 = 0.1;

/// Register size plus the physical scales, all in units of the step duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitModel {
    pub qubits: usize,
    /// Transition frequency `ωT`.
    pub frequency: Option<f64>,
    /// Longitudinal coupling `JT` while a coupling is switched on.
    pub coupling: Option<f64>,
    /// Per-qubit decay `κT`.
    pub decay: f64,
}

impl QubitModel {
    pub fn new(qubits: usize) -> Result<Self> {
        if !(1..=12).contains(&qubits) {
            return Err(Error::Invalid(format!("qubit count {qubits} outside 1..=12")));
        }
        Ok(Self {
            qubits,
            frequency: None,
            coupling: None,
            decay: 0.0,
        })
    }

    pub fn with_decay(mut self, kappa: f64) -> Result<Self> {
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::Invalid(format!("decay rate {kappa} must be finite and non-negative")));
        }
        self.decay = kappa;
        Ok(self)
    }

    pub fn with_frequency(mut self, omega: f64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::Invalid(format!("transition frequency {omega} must be positive")));
        }
        self.frequency = Some(omega);
        Ok(self)
    }

    pub fn with_coupling(mut self, j: f64) -> Result<Self> {
        if !(j >= 0.0) || !j.is_finite() {
            return Err(Error::Invalid(format!("coupling {j} must be finite and non-negative")));
        }
        self.coupling = Some(j);
        Ok(self)
    }

    /// `JT`, explicit or `COUPLING_RATIO · ωT`.
    pub fn coupling_strength(&self) -> Option<f64> {
        self.coupling.or(self.frequency.map(|w| COUPLING_RATIO * w))
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    /// Whether `qubit` (0-based) is excited in product state `index`.
    pub fn is_excited(&self, index: usize, qubit: usize) -> bool {
        index >> (self.qubits - 1 - qubit) & 1 == 1
    }

    /// `"eg…"` label of a product state.
    pub fn label(&self, index: usize) -> String {
        (0..self.qubits)
            .map(|q| if self.is_excited(index, q) { 'e' } else { 'g' })
            .collect()
    }

    pub fn index(&self, label: &str) -> Result<usize> {
        if label.len() != self.qubits {
            return Err(Error::Invalid(format!("label `{label}` does not name {} qubits", self.qubits)));
        }
        label.chars().try_fold(0usize, |acc, c| match c {
            'g' => Ok(acc << 1),
            'e' => Ok(acc << 1 | 1),
            _ => Err(Error::Invalid(format!("label `{label}` may only contain g and e"))),
        })
    }

    pub fn product_state(&self, label: &str) -> Result<StateVector> {
        Ok(StateVector::basis(self.dim(), self.index(label)?))
    }

    /// `(|a⟩ + sign·|b⟩)/√2`.
    pub fn pair_state(&self, a: &str, b: &str, sign: f64) -> Result<StateVector> {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::superposition(
            self.dim(),
            &[(self.index(a)?, Complex64::new(r, 0.0)), (self.index(b)?, Complex64::new(sign * r, 0.0))],
        )
    }

    /// `σ⁻` on every qubit at rate `κ`.
    pub fn dissipators(&self) -> Result<Vec<Dissipator>> {
        (0..self.qubits)
            .map(|q| Dissipator::new(pauli::embed(&pauli::lowering(), q, self.qubits), self.decay))
            .collect()
    }
}

/// Drive frequency `ω₀ = −ω + s·J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrequencyRule {
    /// `ω₀ = −ω + J`
    PlusCoupling,
    /// `ω₀ = −ω`
    Bare,
    /// `ω₀ = −ω − J`
    MinusCoupling,
}

impl FrequencyRule {
    pub fn sign(self) -> i32 {
        match self {
            Self::PlusCoupling => 1,
            Self::Bare => 0,
            Self::MinusCoupling => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HamiltonianMode {
    /// Resonant terms only.
    #[default]
    Effective,
    /// Every drive term with its `e^{iνt}` oscillation in the frame of the static Hamiltonian.
    RotatingFrame,
}

/// One stage of a protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolStep {
    pub name: String,
    pub start: f64,
    pub duration: f64,
    pub layout: SubspaceLayout,
    /// Product-basis index of each layout level.
    pub embedding: Vec<usize>,
    pub schedules: ScheduleSet,
    pub frequency: FrequencyRule,
    /// Neighbour pairs `(q, q+1)` whose coupling is on.
    pub couplings: Vec<(usize, usize)>,
    /// Driven qubits.
    pub drives: Vec<usize>,
    /// Frame index of the passage that carries the state.
    pub passage: usize,
    pub initial: StateVector,
    pub target: StateVector,
    /// The effective form assumes `J ≫ Ω`.
    pub strong_coupling: bool,
    pub mode: HamiltonianMode,
}

impl ProtocolStep {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    /// Fails unless the embedding is injective and every coupling is a neighbour pair.
    pub fn validate(&self, model: &QubitModel) -> Result<()> {
        if self.embedding.len() != self.layout.dim() {
            return Err(Error::Dimension(format!(
                "step `{}` embeds {} levels into a layout of {}",
                self.name,
                self.embedding.len(),
                self.layout.dim()
            )));
        }
        let mut seen = self.embedding.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.embedding.len() || seen.last().is_some_and(|&i| i >= model.dim()) {
            return Err(Error::Invalid(format!("step `{}` embedding is not injective into the register", self.name)));
        }
        if let Some(&(a, b)) = self.couplings.iter().find(|&&(a, b)| b != a + 1 || b >= model.qubits) {
            return Err(Error::Invalid(format!("step `{}` couples ({a}, {b}), not a neighbour pair", self.name)));
        }
        if let Some(&q) = self.drives.iter().find(|&&q| q >= model.qubits) {
            return Err(Error::Invalid(format!("step `{}` drives qubit {q} of {}", self.name, model.qubits)));
        }
        if self.passage >= self.layout.dim() {
            return Err(Error::OutOfRange(format!("step `{}` passage {}", self.name, self.passage)));
        }
        for s in [&self.initial, &self.target] {
            if s.dim() != model.dim() || !s.is_normalized() {
                return Err(Error::Invalid(format!("step `{}` boundary states must be normalized {}-vectors", self.name, model.dim())));
            }
        }
        Ok(())
    }
}

/// Ordered steps with the labels whose populations are reported.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolPlan {
    pub name: String,
    pub model: QubitModel,
    pub steps: Vec<ProtocolStep>,
    pub labels: Vec<String>,
}

impl ProtocolPlan {
    pub fn initial(&self) -> &StateVector {
        &self.steps[0].initial
    }

    pub fn final_target(&self) -> &StateVector {
        &self.steps.last().expect("a plan has steps").target
    }

    pub fn start(&self) -> f64 {
        self.steps[0].start
    }

    pub fn end(&self) -> f64 {
        self.steps.last().expect("a plan has steps").end()
    }

    /// `(label, index)` pairs for the reported populations.
    pub fn label_indices(&self) -> Result<Vec<(String, usize)>> {
        self.labels.iter().map(|l| Ok((l.clone(), self.model.index(l)?))).collect()
    }

    /// Replaces one schedule of the named step. The symbol must be one the
    /// step's layout reads; call [`Self::validate`] once all overrides are in.
    pub fn override_schedule(&mut self, step: &str, symbol: Symbol, kind: ScheduleKind) -> Result<()> {
        let s = self
            .steps
            .iter_mut()
            .find(|s| s.name == step)
            .ok_or_else(|| Error::Invalid(format!("plan `{}` has no step `{step}`", self.name)))?;
        let (m, n) = (s.layout.assistant_levels(), s.layout.working_levels());
        if !Symbol::required(m, n).contains(&symbol) {
            return Err(Error::MissingSymbol(format!("{symbol} is not a parameter of step `{step}` ({m}+{n} levels)")));
        }
        s.schedules.insert(symbol, kind)
    }

    /// Checks every step, contiguity in time, the hand-over of boundary states,
    /// that the drive can be realized on the qubits, and that each step's
    /// passage maps its initial state onto its target.
    pub fn validate(&self) -> Result<()> {
        if self.steps.is_empty() {
            return Err(Error::Invalid(format!("plan `{}` has no steps", self.name)));
        }
        self.label_indices()?;
        for step in &self.steps {
            step.validate(&self.model)?;
        }
        for w in self.steps.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if (a.end() - b.start).abs() > 1e-12 * a.end().abs().max(1.0) {
                return Err(Error::Invalid(format!("step `{}` does not start where `{}` ends", b.name, a.name)));
            }
            if a.target.overlap_probability(&b.initial) < 1.0 - 1e-12 {
                return Err(Error::Invalid(format!(
                    "step `{}` starts from a state other than the target of `{}`",
                    b.name, a.name
                )));
            }
        }
        for step in &self.steps {
            let drive = synthesize_general(step.layout, &step.schedules)?;
            for i in 0..=DRIVE_CHECK_POINTS {
                let t = step.start + step.duration * i as f64 / DRIVE_CHECK_POINTS as f64;
                qubit_drives(step, &self.model, &drive.sample(t)?)?;
            }
            let reached = nominal_final_state(step)?;
            let f = reached.overlap_probability(&step.target);
            if f < 1.0 - 1e-9 {
                return Err(Error::Invalid(format!(
                    "boundary conditions of step `{}` carry its initial state to fidelity {f:.12} with the target",
                    step.name
                )));
            }
        }
        Ok(())
    }
}
