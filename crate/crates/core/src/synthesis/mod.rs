//! Drive synthesis.
//!
//! Given schedules for the frame parameters, [`synthesize_general`] returns the
//! couplings `Ω_n^(m) e^{iφ_n^(m)}` and the common detuning `Δ` under which
//! the two cross-subspace bases `|μ_{N−1}⟩` and `|μ_N⟩` evolve without
//! transitions. The coupling of `|e_m⟩` to `|n⟩` is
//!
//! ```text
//! Ω e^{iϕ} ⟨e_m|b̃_{M−2}⟩ ⟨b_{N−2}|n⟩,   Ω = −φ̇ / sin(ϕ+α),
//! Δ = α̇ − 2 φ̇ cot(ϕ+α) cot(2φ).
//! ```

mod conversion;
mod phases;
mod reduction;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use self::conversion::{convert_dark_state, convert_dark_state_with, synthesize_converted, AuxiliaryDrive, AuxiliarySample, ConversionReading};
pub use self::phases::{generated_phases, GeneratedPhases};
pub use self::reduction::{reduction_crosscheck, special_case_couplings, LimitCheck, ReductionReport, UpperLimit};

use crate::ancillary::{build_frame, terminal_components, SubspaceLayout};
use crate::error::{Error, Result};
use crate::grid::{TimeGrid, DEFAULT_STEPS};
use crate::linalg::{Complex64, ComplexMatrix};
use crate::schedules::{ScheduleSet, Symbol};
use crate::tolerances::TOL;

/// Which closed form supplies the detuning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetuningForm {
    /// `α̇ − 2φ̇ cot(ϕ+α) cot 2φ`, the form that solves the passage condition.
    #[default]
    Exact,
    /// `α̇ − 2φ̇ cot(ϕ+α) cos 2φ`; kept only to demonstrate that it fails.
    CosineVariant,
}

/// Master envelope, detuning and every coupling at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveSample {
    pub t: f64,
    /// Master envelope Ω.
    pub omega: f64,
    /// Master phase ϕ.
    pub drive_phase: f64,
    /// Common detuning Δ of the assistant levels.
    pub detuning: f64,
    /// `⟨e_m|H|n⟩` at index `m·N + n`.
    pub couplings: Vec<Complex64>,
    /// `φ_n^(m) = ϕ − α̃_{m−1} + α_{n−1}` at index `m·N + n`.
    pub phases: Vec<f64>,
    pub auxiliary: Option<AuxiliarySample>,
    working: usize,
}

impl DriveSample {
    pub fn coupling(&self, m: usize, n: usize) -> Complex64 {
        self.couplings[m * self.working + n]
    }

    /// Signed Rabi frequency `Ω_n^(m)` relative to the phase `φ_n^(m)`.
    pub fn rabi(&self, m: usize, n: usize) -> f64 {
        let k = m * self.working + n;
        (self.couplings[k] * Complex64::from_polar(1.0, -self.phases[k])).re
    }

    pub fn phase(&self, m: usize, n: usize) -> f64 {
        self.phases[m * self.working + n]
    }
}

/// A synthesized drive: evaluates couplings, detuning and Hamiltonian at any
/// time inside the schedule domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivePlan {
    layout: SubspaceLayout,
    schedules: ScheduleSet,
    detuning_form: DetuningForm,
    auxiliary: Option<AuxiliaryDrive>,
}

/// Synthesizes the drive for static cascade schedules, scanning the default
/// grid for singular points.
pub fn synthesize_general(layout: SubspaceLayout, schedules: &ScheduleSet) -> Result<DrivePlan> {
    let grid = TimeGrid::new(schedules.start(), schedules.end(), DEFAULT_STEPS)?;
    synthesize_on(layout, schedules, &grid)
}

/// As [`synthesize_general`], scanning the points and midpoints of `grid`.
pub fn synthesize_on(layout: SubspaceLayout, schedules: &ScheduleSet, grid: &TimeGrid) -> Result<DrivePlan> {
    schedules.check_complete()?;
    schedules.check_static_cascade()?;
    let plan = DrivePlan::unchecked(layout, schedules.clone(), None);
    plan.scan(grid)?;
    Ok(plan)
}

impl DrivePlan {
    pub(crate) fn unchecked(
        layout: SubspaceLayout,
        schedules: ScheduleSet,
        auxiliary: Option<AuxiliaryDrive>,
    ) -> Self {
        Self {
            layout,
            schedules,
            detuning_form: DetuningForm::Exact,
            auxiliary,
        }
    }

    /// Same plan with the detuning taken from `form`.
    pub fn with_detuning_form(mut self, form: DetuningForm) -> Self {
        self.detuning_form = form;
        self
    }

    pub fn layout(&self) -> SubspaceLayout {
        self.layout
    }

    pub fn schedules(&self) -> &ScheduleSet {
        &self.schedules
    }

    pub fn auxiliary(&self) -> Option<&AuxiliaryDrive> {
        self.auxiliary.as_ref()
    }

    pub fn detuning_form(&self) -> DetuningForm {
        self.detuning_form
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.schedules.start(), self.schedules.end())
    }

    pub(crate) fn scan(&self, grid: &TimeGrid) -> Result<()> {
        grid.check_within(self.schedules.start(), self.schedules.end())?;
        (0..grid.len())
            .into_par_iter()
            .try_for_each(|i| {
                self.sample(grid.point(i))?;
                if i < grid.steps() {
                    self.sample(grid.midpoint(i))?;
                }
                Ok(())
            })
    }

    /// `(Ω, Δ)` at `t`.
    pub fn envelope(&self, t: f64) -> Result<(f64, f64)> {
        let (phi, phi_rate) = self.schedules.eval(Symbol::Mixing, t)?;
        let (alpha, alpha_rate) = self.schedules.eval(Symbol::RelativePhase, t)?;
        let (varphi, _) = self.schedules.eval(Symbol::DrivePhase, t)?;
        let (s, c) = (varphi + alpha).sin_cos();
        if phi_rate.abs() <= TOL.stationary_rate {
            return Ok((0.0, alpha_rate));
        }
        if s.abs() < TOL.singular_sine {
            return Err(Error::Singular {
                t,
                reason: format!("|sin(ϕ+α)| = {:.3e} while the mixing angle moves", s.abs()),
            });
        }
        let omega = -phi_rate / s;
        let pull = phi_rate * c / s;
        let detuning = if pull.abs() <= TOL.stationary_rate {
            alpha_rate
        } else {
            let (s2, c2) = (2.0 * phi).sin_cos();
            match self.detuning_form {
                DetuningForm::Exact => {
                    if s2.abs() < TOL.singular_sine {
                        return Err(Error::Singular {
                            t,
                            reason: format!("|sin 2φ| = {:.3e} while φ̇·cot(ϕ+α) ≠ 0", s2.abs()),
                        });
                    }
                    alpha_rate - 2.0 * pull * c2 / s2
                }
                DetuningForm::CosineVariant => alpha_rate - 2.0 * pull * c2,
            }
        };
        Ok((omega, detuning))
    }

    pub fn sample(&self, t: f64) -> Result<DriveSample> {
        let (omega, detuning) = self.envelope(t)?;
        let (varphi, _) = self.schedules.eval(Symbol::DrivePhase, t)?;
        let frame = build_frame(self.layout, &self.schedules, t)?;
        let (assist, work) = terminal_components(&frame);
        let master = Complex64::from_polar(omega, varphi);
        let (m_levels, n_levels) = (self.layout.assistant_levels(), self.layout.working_levels());

        let prior = |sym: fn(usize) -> Symbol, i: usize| -> Result<f64> {
            if i == 0 {
                Ok(0.0)
            } else {
                self.schedules.eval(sym(i - 1), t).map(|v| v.0)
            }
        };
        let mut couplings = Vec::with_capacity(m_levels * n_levels);
        let mut phases = Vec::with_capacity(m_levels * n_levels);
        for (m, a) in assist.iter().enumerate() {
            let at = prior(Symbol::AlphaTilde, m)?;
            for (n, w) in work.iter().enumerate() {
                couplings.push(master * a * w);
                phases.push(varphi - at + prior(Symbol::Alpha, n)?);
            }
        }
        let auxiliary = match &self.auxiliary {
            Some(aux) => Some(aux.sample(&self.schedules, t)?),
            None => None,
        };
        Ok(DriveSample {
            t,
            omega,
            drive_phase: varphi,
            detuning,
            couplings,
            phases,
            auxiliary,
            working: n_levels,
        })
    }

    /// The Hamiltonian in the `(M+N)`-level space.
    pub fn hamiltonian(&self, t: f64) -> Result<ComplexMatrix> {
        let s = self.sample(t)?;
        Ok(assemble(self.layout, &s))
    }

    /// Samples on every point of `grid`, in parallel.
    pub fn tabulate(&self, grid: &TimeGrid) -> Result<Vec<DriveSample>> {
        grid.check_within(self.schedules.start(), self.schedules.end())?;
        (0..grid.len())
            .into_par_iter()
            .map(|i| self.sample(grid.point(i)))
            .collect()
    }

    /// Column names of [`Self::table_row`].
    pub fn table_header(&self) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        for m in 0..self.layout.assistant_levels() {
            for n in 0..self.layout.working_levels() {
                h.push(format!("Omega_{n}^({m})"));
                h.push(format!("phi_{n}^({m})"));
            }
        }
        h.push("Delta".into());
        h
    }

    pub fn table_row(&self, s: &DriveSample) -> Vec<f64> {
        let mut row = vec![s.t];
        for m in 0..self.layout.assistant_levels() {
            for n in 0..self.layout.working_levels() {
                row.push(s.rabi(m, n));
                row.push(s.phase(m, n));
            }
        }
        row.push(s.detuning);
        row
    }
}

/// `Δ Σ_m |e_m⟩⟨e_m| + Σ c_mn |e_m⟩⟨n| + h.c. + h`.
pub(crate) fn assemble(layout: SubspaceLayout, s: &DriveSample) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(layout.dim(), layout.dim());
    for m in 0..layout.assistant_levels() {
        let em = layout.assistant_index(m);
        h[(em, em)] = Complex64::new(s.detuning, 0.0);
        for n in 0..layout.working_levels() {
            h.set_hermitian_pair(em, layout.working_index(n), s.coupling(m, n));
        }
    }
    if let Some(aux) = &s.auxiliary {
        aux.add_to(layout, &mut h);
    }
    h
}
