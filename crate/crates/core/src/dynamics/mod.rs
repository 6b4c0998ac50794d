//! Closed and open time evolution, passage diagnostics and fidelity metrics.
//!
//! Closed systems use the exponential midpoint rule, which is unitary by
//! construction. Open systems integrate the Lindblad equation with RK4,
//! symmetrizing after each step and monitoring trace and positivity.

mod closed;
mod diagnostics;
mod lindblad;

use serde::{Deserialize, Serialize};

pub use self::closed::{propagate_schrodinger, propagate_schrodinger_observed, propagate_unitary};
pub use self::diagnostics::{gd_matrices, passage_residual, reconstruct_evolution, von_neumann_residual};
pub use self::lindblad::{propagate_lindblad, propagate_lindblad_observed, Dissipator};

use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, StateVector};

/// Integrator health figures collected during a run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub max_norm_drift: f64,
    pub max_trace_drift: f64,
    /// Smallest density-matrix eigenvalue seen at checkpoints.
    pub min_eigenvalue: Option<f64>,
    /// Largest relative passage residual, when the run tracks one.
    pub max_residual: Option<f64>,
}

impl Diagnostics {
    /// Worst-case combination of two runs.
    pub fn merge(self, other: Self) -> Self {
        let min_opt = |a: Option<f64>, b: Option<f64>, f: fn(f64, f64) -> f64| match (a, b) {
            (Some(x), Some(y)) => Some(f(x, y)),
            (x, None) => x,
            (None, y) => y,
        };
        Self {
            max_norm_drift: self.max_norm_drift.max(other.max_norm_drift),
            max_trace_drift: self.max_trace_drift.max(other.max_trace_drift),
            min_eigenvalue: min_opt(self.min_eigenvalue, other.min_eigenvalue, f64::min),
            max_residual: min_opt(self.max_residual, other.max_residual, f64::max),
        }
    }
}

/// States on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub diagnostics: Diagnostics,
}

/// What [`metrics`] needs from a state.
pub trait QuantumState {
    fn dim(&self) -> usize;
    /// `⟨n|ρ|n⟩`.
    fn population(&self, index: usize) -> f64;
    /// `⟨ψ|ρ|ψ⟩`.
    fn fidelity(&self, target: &StateVector) -> f64;
    fn snapshot(&self) -> FinalState;
}

impl QuantumState for StateVector {
    fn dim(&self) -> usize {
        StateVector::dim(self)
    }

    fn population(&self, index: usize) -> f64 {
        StateVector::population(self, index)
    }

    fn fidelity(&self, target: &StateVector) -> f64 {
        target.overlap_probability(self)
    }

    fn snapshot(&self) -> FinalState {
        FinalState::Pure { state: self.clone() }
    }
}

impl QuantumState for DensityMatrix {
    fn dim(&self) -> usize {
        DensityMatrix::dim(self)
    }

    fn population(&self, index: usize) -> f64 {
        DensityMatrix::population(self, index)
    }

    fn fidelity(&self, target: &StateVector) -> f64 {
        DensityMatrix::fidelity(self, target)
    }

    fn snapshot(&self) -> FinalState {
        FinalState::Mixed { state: self.clone() }
    }
}

/// Final state of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FinalState {
    Pure { state: StateVector },
    Mixed { state: DensityMatrix },
}

/// Populations and fidelity on a grid, with integrator diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub times: Vec<f64>,
    /// Label of each population series, sorted.
    pub labels: Vec<String>,
    /// `populations[j][i]` is `P_{labels[j]}(times[i])`.
    pub populations: Vec<Vec<f64>>,
    pub fidelity: Vec<f64>,
    /// Relative passage residual per grid point, where tracked.
    pub residual: Option<Vec<f64>>,
    pub final_state: Option<FinalState>,
    pub diagnostics: Diagnostics,
}

impl SimulationResult {
    pub fn final_fidelity(&self) -> f64 {
        *self.fidelity.last().expect("non-empty trajectory")
    }

    /// Index of the grid point closest to `t`.
    pub fn index_at(&self, t: f64) -> usize {
        self.times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    pub fn population(&self, label: &str, i: usize) -> Option<f64> {
        let j = self.labels.iter().position(|l| l == label)?;
        Some(self.populations[j][i])
    }

    /// Column names of [`Self::row`].
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        h.extend(self.labels.iter().map(|l| format!("P_{l}")));
        h.push("F".into());
        h.push("residual".into());
        h
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        let mut r = vec![self.times[i]];
        r.extend(self.populations.iter().map(|p| p[i]));
        r.push(self.fidelity[i]);
        r.push(self.residual.as_ref().map_or(f64::NAN, |res| res[i]));
        r
    }

    /// Appends `other`, dropping its first point when it repeats this run's last time.
    pub fn append(&mut self, other: SimulationResult) -> Result<()> {
        if self.labels != other.labels {
            return Err(Error::Invalid("cannot join results with different labels".into()));
        }
        let skip = match (self.times.last(), other.times.first()) {
            (Some(a), Some(b)) if (a - b).abs() <= 1e-12 * a.abs().max(1.0) => 1,
            _ => 0,
        };
        self.times.extend(&other.times[skip..]);
        for (mine, theirs) in self.populations.iter_mut().zip(&other.populations) {
            mine.extend(&theirs[skip..]);
        }
        self.fidelity.extend(&other.fidelity[skip..]);
        self.residual = match (self.residual.take(), other.residual) {
            (Some(mut a), Some(b)) => {
                a.extend(&b[skip..]);
                Some(a)
            }
            _ => None,
        };
        self.final_state = other.final_state;
        self.diagnostics = self.diagnostics.merge(other.diagnostics);
        Ok(())
    }
}

/// Incremental builder used by propagator observers.
#[derive(Debug, Clone)]
pub struct MetricsRecorder {
    target: StateVector,
    labels: Vec<(String, usize)>,
    times: Vec<f64>,
    populations: Vec<Vec<f64>>,
    fidelity: Vec<f64>,
}

impl MetricsRecorder {
    /// Fails if the target is not normalized or a label index exceeds `dim`.
    pub fn new(target: &StateVector, labels: &[(String, usize)], dim: usize) -> Result<Self> {
        if target.dim() != dim {
            return Err(Error::Dimension(format!(
                "target has dimension {}, states have {dim}",
                target.dim()
            )));
        }
        if !target.is_normalized() {
            return Err(Error::Invalid("target state must be normalized".into()));
        }
        if let Some((l, i)) = labels.iter().find(|(_, i)| *i >= dim) {
            return Err(Error::Dimension(format!("label {l} points at index {i} of a {dim}-state")));
        }
        let mut labels = labels.to_vec();
        labels.sort();
        Ok(Self {
            target: target.clone(),
            populations: vec![Vec::new(); labels.len()],
            labels,
            times: Vec::new(),
            fidelity: Vec::new(),
        })
    }

    pub fn record<S: QuantumState>(&mut self, t: f64, state: &S) {
        self.times.push(t);
        for (series, (_, idx)) in self.populations.iter_mut().zip(&self.labels) {
            series.push(state.population(*idx));
        }
        self.fidelity.push(state.fidelity(&self.target));
    }

    pub fn finish(self, final_state: Option<FinalState>, diagnostics: Diagnostics) -> SimulationResult {
        SimulationResult {
            times: self.times,
            labels: self.labels.into_iter().map(|(l, _)| l).collect(),
            populations: self.populations,
            fidelity: self.fidelity,
            residual: None,
            final_state,
            diagnostics,
        }
    }
}

/// Populations of the labeled basis states and fidelity against `target`.
pub fn metrics<S: QuantumState>(
    trajectory: &Trajectory<S>,
    target: &StateVector,
    labels: &[(String, usize)],
) -> Result<SimulationResult> {
    let dim = trajectory.states.first().map_or(target.dim(), |s| s.dim());
    let mut rec = MetricsRecorder::new(target, labels, dim)?;
    for (t, s) in trajectory.times.iter().zip(&trajectory.states) {
        rec.record(*t, s);
    }
    let last = trajectory.states.last().map(QuantumState::snapshot);
    Ok(rec.finish(last, trajectory.diagnostics))
}

#[cfg(test)]
mod tests;
