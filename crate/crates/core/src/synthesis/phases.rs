use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DrivePlan;
use crate::error::Result;
use crate::grid::TimeGrid;
use crate::schedules::Symbol;

/// Phases accumulated along each base, tabulated on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedPhases {
    pub times: Vec<f64>,
    /// `f̃_m(t)` for `m = 0..M−2`.
    pub assistant: Vec<Vec<f64>>,
    /// `f_n(t)` for `n = 0..N−2`; identically zero.
    pub working: Vec<Vec<f64>>,
    /// `f_{N−1}(t)`.
    pub lower: Vec<f64>,
    /// `f_N(t)`.
    pub upper: Vec<f64>,
}

impl GeneratedPhases {
    /// All phases at grid point `i`, in frame order.
    pub fn frame_ordered(&self, i: usize) -> Vec<f64> {
        self.assistant
            .iter()
            .chain(&self.working)
            .map(|f| f[i])
            .chain([self.lower[i], self.upper[i]])
            .collect()
    }

    /// The same phases restricted to the grid points `indices`.
    pub fn select(&self, indices: &[usize]) -> Self {
        let pick = |f: &Vec<f64>| indices.iter().map(|&i| f[i]).collect::<Vec<_>>();
        Self {
            times: pick(&self.times),
            assistant: self.assistant.iter().map(pick).collect(),
            working: self.working.iter().map(pick).collect(),
            lower: pick(&self.lower),
            upper: pick(&self.upper),
        }
    }
}

/// Integrates the generated phases by the trapezoidal rule on `grid`.
pub fn generated_phases(plan: &DrivePlan, grid: &TimeGrid) -> Result<GeneratedPhases> {
    let (start, end) = plan.domain();
    grid.check_within(start, end)?;
    let s = plan.schedules();
    // (−Δ, lower integrand, α̇ − Δ) at every grid point.
    let rates: Vec<(f64, f64, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let t = grid.point(i);
            let (omega, delta) = plan.envelope(t)?;
            let (phi, _) = s.eval(Symbol::Mixing, t)?;
            let (alpha, alpha_rate) = s.eval(Symbol::RelativePhase, t)?;
            let (varphi, _) = s.eval(Symbol::DrivePhase, t)?;
            let sin2 = phi.sin().powi(2);
            let geometric = alpha_rate * sin2;
            let dynamical = delta * sin2 - omega * (2.0 * phi).sin() * (varphi + alpha).cos();
            Ok((-delta, geometric - dynamical, alpha_rate - delta))
        })
        .collect::<Result<_>>()?;

    let integrate = |f: &dyn Fn(&(f64, f64, f64)) -> f64| -> Vec<f64> {
        let half = 0.5 * grid.dt();
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(rates.len());
        out.push(0.0);
        for w in rates.windows(2) {
            acc += half * (f(&w[0]) + f(&w[1]));
            out.push(acc);
        }
        out
    };
    let assistant_phase = integrate(&|r| r.0);
    let lower = integrate(&|r| r.1);
    let total = integrate(&|r| r.2);
    let upper = total.iter().zip(&lower).map(|(a, b)| a - b).collect();
    let layout = plan.layout();
    Ok(GeneratedPhases {
        times: grid.times(),
        assistant: vec![assistant_phase; layout.assistant_levels() - 1],
        working: vec![vec![0.0; grid.len()]; layout.working_levels() - 1],
        lower,
        upper,
    })
}
