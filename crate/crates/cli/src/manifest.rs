use std::path::Path;

use passage_core::dynamics::Diagnostics;
use passage_core::protocols::{ProtocolRun, StepSummary};
use passage_core::TOL;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEcho {
    pub param: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub source: String,
    pub command: String,
    pub settings: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepEcho>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub index: usize,
    pub kappa_t: f64,
    pub kappa_over_omega: Option<f64>,
    pub omega_t: Option<f64>,
    pub steps_per_stage: usize,
    pub csv: String,
    pub final_fidelity: f64,
    pub steps: Vec<StepSummary>,
    pub diagnostics: Diagnostics,
    pub passed: bool,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ConfigEcho,
    pub runs: Vec<RunRecord>,
    pub version: String,
    pub duration_seconds: f64,
}

impl Manifest {
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n").map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Thresholds a finished run is held to.
pub fn diagnostic_failures(run: &ProtocolRun) -> Vec<String> {
    let d = &run.result.diagnostics;
    let mut out = Vec::new();
    if d.max_norm_drift > TOL.state_norm {
        out.push(format!("norm drift {:.3e} > {:.1e}", d.max_norm_drift, TOL.state_norm));
    }
    if d.max_trace_drift > TOL.trace_drift {
        out.push(format!("trace drift {:.3e} > {:.1e}", d.max_trace_drift, TOL.trace_drift));
    }
    if let Some(e) = d.min_eigenvalue.filter(|&e| e < -TOL.positivity) {
        out.push(format!("density matrix eigenvalue {e:.3e} < {:.1e}", -TOL.positivity));
    }
    if let Some(r) = d.max_residual.filter(|&r| r > TOL.passage_residual) {
        out.push(format!("passage residual {r:.3e} > {:.1e}", TOL.passage_residual));
    }
    out
}
