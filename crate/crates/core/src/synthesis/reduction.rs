//! Closed-form couplings for one or two assistant levels, coded independently
//! of the general synthesis, and a comparison of the two.
//!
//! The closed forms carry a product `Π sin θ_{n'}` over the working angles. Its
//! upper index can be read as `N−2` or `N−1`; the second reading needs an
//! angle `θ_{N−1}` that the frame does not define, so it is evaluated with a
//! caller-chosen probe value. The passage residual decides which reading is
//! consistent.

use serde::{Deserialize, Serialize};

use super::DrivePlan;
use crate::ancillary::{build_frame, SubspaceLayout};
use crate::dynamics::passage_residual;
use crate::error::{Error, Result};
use crate::linalg::{Complex64, ComplexMatrix};
use crate::schedules::{ScheduleSet, Symbol};
use crate::tolerances::TOL;

const SAMPLES: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum UpperLimit {
    /// Product over `n' = n … N−2`.
    SecondLast,
    /// Product over `n' = n … N−1` with `θ_{N−1} = probe`.
    Last { probe: f64 },
}

/// Special-case couplings `⟨e_m|H|n⟩` at `t`, indexed `m·N + n`.
pub fn special_case_couplings(
    layout: SubspaceLayout,
    plan: &DrivePlan,
    t: f64,
    limit: UpperLimit,
) -> Result<Vec<Complex64>> {
    let s = plan.schedules();
    let n_levels = layout.working_levels();
    let (omega, _) = plan.envelope(t)?;
    let varphi = s.eval(Symbol::DrivePhase, t)?.0;
    let mut theta = (0..n_levels - 1)
        .map(|i| s.eval(Symbol::Theta(i), t).map(|v| v.0))
        .collect::<Result<Vec<_>>>()?;
    let alpha = (0..n_levels - 1)
        .map(|i| s.eval(Symbol::Alpha(i), t).map(|v| v.0))
        .collect::<Result<Vec<_>>>()?;
    if let UpperLimit::Last { probe } = limit {
        theta.push(probe);
    }
    let working: Vec<(f64, f64)> = (0..n_levels)
        .map(|n| {
            let lead = if n == 0 { 1.0 } else { theta[n - 1].cos() };
            let tail: f64 = theta[n..].iter().map(|x| x.sin()).product();
            let phase = if n == 0 { 0.0 } else { alpha[n - 1] };
            (lead * tail, phase)
        })
        .collect();

    match layout.assistant_levels() {
        1 => Ok(working
            .iter()
            .map(|&(amp, ph)| Complex64::from_polar(omega * amp, varphi + ph))
            .collect()),
        2 => {
            let (tt, at) = (s.eval(Symbol::ThetaTilde(0), t)?.0, s.eval(Symbol::AlphaTilde(0), t)?.0);
            let upper = working
                .iter()
                .map(|&(amp, ph)| Complex64::from_polar(omega * amp * tt.cos(), varphi + ph));
            let lower = working
                .iter()
                .map(|&(amp, ph)| Complex64::from_polar(-omega * amp * tt.sin(), varphi - at + ph));
            Ok(upper.chain(lower).collect())
        }
        m => Err(Error::Layout(format!("closed forms exist for M ∈ {{1, 2}}, not M = {m}"))),
    }
}

/// Agreement of one closed-form reading with the general synthesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCheck {
    pub limit: UpperLimit,
    /// Largest coupling gap, relative to the largest general coupling.
    pub max_gap: f64,
    /// Largest passage residual under the closed-form Hamiltonian, relative to ‖H‖_F.
    pub max_residual: f64,
    pub passes_residual: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub assistant_levels: usize,
    pub working_levels: usize,
    pub second_last: LimitCheck,
    pub last: LimitCheck,
    /// For two assistant levels: largest `|Ω_n^(1)/Ω_n^(0) + tan θ̃_0|`.
    pub ratio_gap: Option<f64>,
    /// Set when the two readings of the product limit disagree.
    pub flagged: bool,
    pub verdict: String,
}

/// Compares the general synthesis against the closed forms for `M ∈ {1, 2}`
/// at evenly spaced interior times. The `N−1` reading is probed with
/// `θ_{N−1} = probe`.
pub fn reduction_crosscheck(layout: SubspaceLayout, schedules: &ScheduleSet, probe: f64) -> Result<ReductionReport> {
    if layout.assistant_levels() > 2 {
        return Err(Error::Layout(format!(
            "reduction cross-check needs M ≤ 2, got M = {}",
            layout.assistant_levels()
        )));
    }
    let plan = super::synthesize_general(layout, schedules)?;
    let (start, end) = plan.domain();
    let times: Vec<f64> = (1..=SAMPLES)
        .map(|i| start + (end - start) * i as f64 / (SAMPLES + 1) as f64)
        .collect();

    let check = |limit: UpperLimit| -> Result<LimitCheck> {
        let mut max_gap: f64 = 0.0;
        let mut max_residual: f64 = 0.0;
        for &t in &times {
            let general = plan.sample(t)?;
            let special = special_case_couplings(layout, &plan, t, limit)?;
            let scale = general.couplings.iter().map(|c| c.norm()).fold(0.0, f64::max);
            if scale > 0.0 {
                let gap = general
                    .couplings
                    .iter()
                    .zip(&special)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                max_gap = max_gap.max(gap / scale);
            }
            let mut h = ComplexMatrix::zeros(layout.dim(), layout.dim());
            for m in 0..layout.assistant_levels() {
                let em = layout.assistant_index(m);
                h[(em, em)] = Complex64::new(general.detuning, 0.0);
                for n in 0..layout.working_levels() {
                    h.set_hermitian_pair(em, layout.working_index(n), special[m * layout.working_levels() + n]);
                }
            }
            let norm = h.frobenius_norm();
            if norm > 0.0 {
                let frame = build_frame(layout, schedules, t)?;
                for k in [layout.lower_passage(), layout.upper_passage()] {
                    max_residual = max_residual.max(passage_residual(&frame, k, &h)? / norm);
                }
            }
        }
        Ok(LimitCheck {
            limit,
            max_gap,
            max_residual,
            passes_residual: max_residual <= TOL.passage_residual,
        })
    };

    let second_last = check(UpperLimit::SecondLast)?;
    let last = check(UpperLimit::Last { probe })?;

    let ratio_gap = if layout.assistant_levels() == 2 {
        let tan = schedules.eval(Symbol::ThetaTilde(0), start)?.0.tan();
        let mut gap: f64 = 0.0;
        for &t in &times {
            let s = plan.sample(t)?;
            for n in 0..layout.working_levels() {
                let lower = s.rabi(0, n);
                if lower.abs() > 1e-12 * s.omega.abs().max(1e-300) {
                    gap = gap.max((s.rabi(1, n) / lower + tan).abs());
                }
            }
        }
        Some(gap)
    } else {
        None
    };

    let flagged = second_last.passes_residual != last.passes_residual
        || (second_last.max_gap - last.max_gap).abs() > 1e-12;
    let verdict = match (second_last.passes_residual, last.passes_residual) {
        (true, true) => "both product limits satisfy the passage condition".to_string(),
        (true, false) => format!(
            "product limit N-2 satisfies the passage condition; N-1 with theta_(N-1) = {probe} rescales every coupling by sin(theta_(N-1)) and fails (residual {:.3e})",
            last.max_residual
        ),
        (false, true) => "only product limit N-1 satisfies the passage condition".to_string(),
        (false, false) => "neither product limit satisfies the passage condition".to_string(),
    };
    Ok(ReductionReport {
        assistant_levels: layout.assistant_levels(),
        working_levels: layout.working_levels(),
        second_last,
        last,
        ratio_gap,
        flagged,
        verdict,
    })
}
