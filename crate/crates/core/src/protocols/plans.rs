use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use super::{FrequencyRule, HamiltonianMode, ProtocolPlan, ProtocolStep, QubitModel};
use crate::ancillary::SubspaceLayout;
use crate::error::{Error, Result};
use crate::linalg::StateVector;
use crate::schedules::{ScheduleKind, ScheduleSet, Symbol};

/// Relative phase `α` of the first Bell step. Both choices pass the passage
/// condition; they differ by the overall sign of the drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BellBoundary {
    #[default]
    AlphaZero,
    AlphaPi,
}

impl BellBoundary {
    pub fn alpha(self) -> f64 {
        match self {
            Self::AlphaZero => 0.0,
            Self::AlphaPi => PI,
        }
    }
}

/// `(π/2) cos(π(t − origin)/(2T))`.
fn falling_ramp(duration: f64, origin: f64) -> ScheduleKind {
    ScheduleKind::CosineRamp {
        amplitude: FRAC_PI_2,
        offset: 0.0,
        period: Some(duration),
        origin,
    }
}

/// `π/2 − (π/2) cos(π(t − origin)/(2T))`, rising from 0 to π/2.
fn rising_ramp(duration: f64, origin: f64) -> ScheduleKind {
    ScheduleKind::CosineRamp {
        amplitude: -FRAC_PI_2,
        offset: FRAC_PI_2,
        period: Some(duration),
        origin,
    }
}

struct Register {
    model: QubitModel,
}

impl Register {
    /// Two-qubit label padded with ground states.
    fn pad(&self, head: &str) -> String {
        format!("{head}{}", "g".repeat(self.model.qubits - head.len()))
    }

    fn index(&self, head: &str) -> Result<usize> {
        self.model.index(&self.pad(head))
    }

    fn basis(&self, head: &str) -> Result<StateVector> {
        self.model.product_state(&self.pad(head))
    }

    fn pair(&self, a: &str, b: &str, sign: f64) -> Result<StateVector> {
        self.model.pair_state(&self.pad(a), &self.pad(b), sign)
    }

    fn embed(&self, heads: &[&str]) -> Result<Vec<usize>> {
        heads.iter().map(|h| self.index(h)).collect()
    }
}

fn excitation_step(reg: &Register, duration: f64, boundary: BellBoundary) -> Result<ProtocolStep> {
    let layout = SubspaceLayout::new(1, 2)?;
    let schedules = ScheduleSet::new(1, 2, 0.0, duration)?
        .with(Symbol::Theta(0), ScheduleKind::constant(FRAC_PI_4))?
        .with(Symbol::Alpha(0), ScheduleKind::constant(0.0))?
        .with(Symbol::Mixing, falling_ramp(duration, 0.0))?
        .with(Symbol::RelativePhase, ScheduleKind::constant(boundary.alpha()))?
        .with(Symbol::DrivePhase, ScheduleKind::constant(FRAC_PI_2))?;
    Ok(ProtocolStep {
        name: "excitation".into(),
        start: 0.0,
        duration,
        layout,
        embedding: reg.embed(&["gg", "eg", "ge"])?,
        schedules,
        frequency: FrequencyRule::PlusCoupling,
        couplings: vec![(0, 1)],
        drives: vec![0, 1],
        passage: layout.lower_passage(),
        initial: reg.basis("gg")?,
        target: reg.pair("eg", "ge", 1.0)?,
        strong_coupling: true,
        mode: HamiltonianMode::Effective,
    })
}

/// Single- to double-excitation conversion on `[T, 2T]`, or its inverse.
fn conversion_step(reg: &Register, duration: f64, reverse: bool) -> Result<ProtocolStep> {
    let layout = SubspaceLayout::new(2, 2)?;
    let origin = if reverse { duration } else { 0.0 };
    let schedules = ScheduleSet::new(2, 2, duration, duration)?
        .with(Symbol::ThetaTilde(0), ScheduleKind::constant(FRAC_PI_4))?
        .with(Symbol::AlphaTilde(0), ScheduleKind::constant(0.0))?
        .with(Symbol::Theta(0), ScheduleKind::constant(FRAC_PI_4))?
        .with(Symbol::Alpha(0), ScheduleKind::constant(0.0))?
        .with(Symbol::Mixing, falling_ramp(duration, origin))?
        .with(Symbol::RelativePhase, ScheduleKind::constant(PI))?
        .with(Symbol::DrivePhase, ScheduleKind::constant(FRAC_PI_2))?;
    let single = reg.pair("eg", "ge", 1.0)?;
    let double = reg.pair("ee", "gg", -1.0)?;
    let (initial, target) = if reverse { (double, single) } else { (single, double) };
    Ok(ProtocolStep {
        name: if reverse { "reverse-conversion" } else { "conversion" }.into(),
        start: duration,
        duration,
        layout,
        embedding: reg.embed(&["ee", "gg", "eg", "ge"])?,
        schedules,
        frequency: FrequencyRule::Bare,
        couplings: Vec::new(),
        drives: vec![0, 1],
        passage: layout.lower_passage(),
        initial,
        target,
        strong_coupling: false,
        mode: HamiltonianMode::Effective,
    })
}

/// Step `k ≥ 3`: `(e^{k−1} − g^{k−1}) g… → (e^k − g^k) g…` by driving qubit `k`.
fn extension_step(reg: &Register, duration: f64, k: usize) -> Result<ProtocolStep> {
    let n = reg.model.qubits;
    let layout = SubspaceLayout::new(1, 1)?;
    let start = (k - 1) as f64 * duration;
    let schedules = ScheduleSet::new(1, 1, start, duration)?
        .with(Symbol::Mixing, rising_ramp(duration, start))?
        .with(Symbol::RelativePhase, ScheduleKind::constant(PI))?
        .with(Symbol::DrivePhase, ScheduleKind::constant(FRAC_PI_2))?;
    let upper = "e".repeat(k);
    let lower = "e".repeat(k - 1);
    let ground = "g".repeat(n);
    Ok(ProtocolStep {
        name: format!("extension-{k}"),
        start,
        duration,
        layout,
        embedding: reg.embed(&[&upper, &lower])?,
        schedules,
        frequency: FrequencyRule::MinusCoupling,
        couplings: vec![(k - 2, k - 1)],
        drives: vec![k - 1],
        passage: layout.lower_passage(),
        initial: reg.model.pair_state(&reg.pad(&lower), &ground, -1.0)?,
        target: reg.model.pair_state(&reg.pad(&upper), &ground, -1.0)?,
        strong_coupling: true,
        mode: HamiltonianMode::Effective,
    })
}

fn check_duration(duration: f64) -> Result<()> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::Invalid(format!("step duration {duration} must be positive")));
    }
    Ok(())
}

/// `|gg⟩ → (|eg⟩+|ge⟩)/√2 → (|ee⟩−|gg⟩)/√2` in two steps of length `duration`.
pub fn plan_bell(model: QubitModel, duration: f64, boundary: BellBoundary) -> Result<ProtocolPlan> {
    check_duration(duration)?;
    if model.qubits != 2 {
        return Err(Error::Invalid(format!("the Bell plan needs 2 qubits, got {}", model.qubits)));
    }
    let reg = Register { model };
    let plan = ProtocolPlan {
        name: "bell".into(),
        model,
        steps: vec![excitation_step(&reg, duration, boundary)?, conversion_step(&reg, duration, false)?],
        labels: ["gg", "eg", "ge", "ee"].map(String::from).to_vec(),
    };
    plan.validate()?;
    Ok(plan)
}

/// `(|ee⟩−|gg⟩)/√2` at `T` back to `(|eg⟩+|ge⟩)/√2` at `2T`.
pub fn plan_bell_reverse(model: QubitModel, duration: f64) -> Result<ProtocolPlan> {
    check_duration(duration)?;
    if model.qubits != 2 {
        return Err(Error::Invalid(format!("the Bell plan needs 2 qubits, got {}", model.qubits)));
    }
    let reg = Register { model };
    let plan = ProtocolPlan {
        name: "bell-reverse".into(),
        model,
        steps: vec![conversion_step(&reg, duration, true)?],
        labels: ["gg", "eg", "ge", "ee"].map(String::from).to_vec(),
    };
    plan.validate()?;
    Ok(plan)
}

/// `|g⟩^⊗N → (|e⟩^⊗N − |g⟩^⊗N)/√2` in `N` steps.
pub fn plan_ghz(model: QubitModel, duration: f64) -> Result<ProtocolPlan> {
    check_duration(duration)?;
    let n = model.qubits;
    if n < 3 {
        return Err(Error::Invalid(format!("GHZ plans need at least 3 qubits, got {n}; use the Bell plan")));
    }
    let reg = Register { model };
    let mut steps = vec![
        excitation_step(&reg, duration, BellBoundary::AlphaZero)?,
        conversion_step(&reg, duration, false)?,
    ];
    for k in 3..=n {
        steps.push(extension_step(&reg, duration, k)?);
    }
    let mut labels = vec![reg.pad("g"), reg.pad("e"), reg.pad("ge")];
    labels.extend((2..=n).map(|k| reg.pad(&"e".repeat(k))));
    let plan = ProtocolPlan {
        name: "ghz".into(),
        model,
        steps,
        labels,
    };
    plan.validate()?;
    Ok(plan)
}
