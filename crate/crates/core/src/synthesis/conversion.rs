//! Turning a static assistant base `|μ̃_m⟩` into a third passage.
//!
//! The extra drive lives inside the assistant subspace:
//!
//! ```text
//! h = δ |e_{m+1}⟩⟨e_{m+1}| + Σ_{n≤m} ω_n e^{iΦ_n} |e_{m+1}⟩⟨e_n| + h.c.
//!   = δ |e_{m+1}⟩⟨e_{m+1}| + ω e^{i(π/2 − α̃_m)} |e_{m+1}⟩⟨b̃_{m−1}| + h.c.
//! ```
//!
//! with `δ = dα̃_m/dt` and `ω = −dθ̃_m/dt`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::DrivePlan;
use crate::ancillary::SubspaceLayout;
use crate::error::{Error, Result};
use crate::grid::{TimeGrid, DEFAULT_STEPS};
use crate::linalg::{Complex64, ComplexMatrix};
use crate::schedules::{ScheduleSet, Symbol};

/// Which mixing angle's rate sets `ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConversionReading {
    /// `ω = −dθ̃_m/dt`, the assistant cascade angle of the converted base.
    #[default]
    AssistantAngle,
    /// `ω = −dθ_m/dt`, the working cascade angle with the same index.
    WorkingAngle,
}

/// Auxiliary drive converting assistant base `target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxiliaryDrive {
    pub target: usize,
    pub reading: ConversionReading,
}

/// Auxiliary drive values at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxiliarySample {
    pub target: usize,
    /// Extra detuning δ of `|e_{m+1}⟩`.
    pub delta: f64,
    /// Envelope ω.
    pub omega: f64,
    /// `ω_n^(m+1)` for `n = 0..=m`.
    pub rabi: Vec<f64>,
    /// `Φ_n^(m+1)` for `n = 0..=m`.
    pub phases: Vec<f64>,
}

impl AuxiliarySample {
    /// `⟨e_{m+1}|h|e_n⟩`.
    pub fn coupling(&self, n: usize) -> Complex64 {
        Complex64::from_polar(self.rabi[n], self.phases[n])
    }

    pub(crate) fn add_to(&self, layout: SubspaceLayout, h: &mut ComplexMatrix) {
        let top = layout.assistant_index(self.target + 1);
        h[(top, top)] += Complex64::new(self.delta, 0.0);
        for n in 0..=self.target {
            let en = layout.assistant_index(n);
            let c = self.coupling(n);
            h[(top, en)] += c;
            h[(en, top)] += c.conj();
        }
    }
}

impl AuxiliaryDrive {
    pub fn sample(&self, schedules: &ScheduleSet, t: f64) -> Result<AuxiliarySample> {
        let m = self.target;
        let (alpha_m, delta) = schedules.eval(Symbol::AlphaTilde(m), t)?;
        let angle = match self.reading {
            ConversionReading::AssistantAngle => Symbol::ThetaTilde(m),
            ConversionReading::WorkingAngle => Symbol::Theta(m),
        };
        let omega = -schedules.eval(angle, t)?.1;

        let mut theta = Vec::with_capacity(m);
        let mut alpha = Vec::with_capacity(m);
        for i in 0..m {
            theta.push(schedules.eval(Symbol::ThetaTilde(i), t)?.0);
            alpha.push(schedules.eval(Symbol::AlphaTilde(i), t)?.0);
        }
        let mut rabi = Vec::with_capacity(m + 1);
        let mut phases = Vec::with_capacity(m + 1);
        for n in 0..=m {
            let lead = if n == 0 { -1.0 } else { theta[n - 1].sin() };
            let tail: f64 = theta[n..m].iter().map(|x| x.cos()).product();
            rabi.push(-omega * lead * tail);
            let prev = if n == 0 { 0.0 } else { alpha[n - 1] };
            phases.push(FRAC_PI_2 - alpha_m + prev);
        }
        Ok(AuxiliarySample {
            target: m,
            delta,
            omega,
            rabi,
            phases,
        })
    }
}

/// Auxiliary drive for assistant base `m`, with `ω` read from the assistant angle.
pub fn convert_dark_state(layout: SubspaceLayout, schedules: &ScheduleSet, m: usize) -> Result<AuxiliaryDrive> {
    convert_dark_state_with(layout, schedules, m, ConversionReading::AssistantAngle)
}

pub fn convert_dark_state_with(
    layout: SubspaceLayout,
    schedules: &ScheduleSet,
    m: usize,
    reading: ConversionReading,
) -> Result<AuxiliaryDrive> {
    if m + 1 >= layout.assistant_levels() {
        return Err(Error::OutOfRange(format!(
            "assistant base {m} needs level e{} but M = {}",
            m + 1,
            layout.assistant_levels()
        )));
    }
    schedules.get(Symbol::ThetaTilde(m))?;
    schedules.get(Symbol::AlphaTilde(m))?;
    if reading == ConversionReading::WorkingAngle {
        schedules.get(Symbol::Theta(m))?;
    }
    Ok(AuxiliaryDrive { target: m, reading })
}

/// General drive plus the auxiliary drive for assistant base `m`. The
/// schedules of `θ̃_m` and `α̃_m` may vary; every other cascade parameter must
/// stay constant.
pub fn synthesize_converted(
    layout: SubspaceLayout,
    schedules: &ScheduleSet,
    m: usize,
    reading: ConversionReading,
) -> Result<DrivePlan> {
    schedules.check_complete()?;
    let aux = convert_dark_state_with(layout, schedules, m, reading)?;
    for (sym, sched) in schedules.iter() {
        let converted = matches!(sym, Symbol::ThetaTilde(i) | Symbol::AlphaTilde(i) if *i == m);
        if sym.is_cascade() && !converted && !sched.is_constant() {
            return Err(Error::NonConstant(sym.to_string()));
        }
    }
    let plan = DrivePlan::unchecked(layout, schedules.clone(), Some(aux));
    plan.scan(&TimeGrid::new(schedules.start(), schedules.end(), DEFAULT_STEPS)?)?;
    Ok(plan)
}
