//! TOML run configuration. See `configs/` for annotated examples.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use passage_core::protocols::{plan_bell, plan_bell_reverse, plan_ghz, BellBoundary, HamiltonianMode, ProtocolPlan, QubitModel, RunOptions};
use passage_core::{ScheduleKind, Symbol};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_STEPS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolName {
    Bell,
    BellReverse,
    Ghz,
}

impl ProtocolName {
    fn default_qubits(self) -> usize {
        match self {
            Self::Bell | Self::BellReverse => 2,
            Self::Ghz => 3,
        }
    }
}

impl fmt::Display for ProtocolName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Bell => "bell",
            Self::BellReverse => "bell-reverse",
            Self::Ghz => "ghz",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_steps")]
    pub steps_per_stage: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            steps_per_stage: DEFAULT_STEPS,
        }
    }
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

fn default_seed() -> u64 {
    1
}

fn default_true() -> bool {
    true
}

/// Replaces one schedule of a named step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleOverride {
    pub step: String,
    pub symbol: String,
    pub schedule: ScheduleKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub protocol: ProtocolName,
    /// Defaults to 2 for the Bell plans and 3 for GHZ.
    #[serde(default)]
    pub qubits: Option<usize>,
    /// Step duration `T`. Every other time and rate is in units of it.
    pub duration: f64,
    #[serde(default)]
    pub mode: HamiltonianMode,
    #[serde(default)]
    pub boundary: BellBoundary,
    /// Decay rates `κT`, one run each.
    #[serde(default)]
    pub kappa_t: Option<Vec<f64>>,
    /// Decay given as `κ/ω`; needs `omega_t`.
    #[serde(default)]
    pub kappa_over_omega: Option<Vec<f64>>,
    #[serde(default)]
    pub omega_t: Option<f64>,
    #[serde(default)]
    pub j_t: Option<f64>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub enforce_strong_coupling: bool,
    #[serde(default, rename = "override")]
    pub overrides: Vec<ScheduleOverride>,
}

/// One decay setting of a config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunPoint {
    pub kappa_t: f64,
    pub kappa_over_omega: Option<f64>,
}

impl RunConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config {
            path: origin.display().to_string(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn qubits(&self) -> usize {
        self.qubits.unwrap_or(self.protocol.default_qubits())
    }

    pub fn points(&self) -> Vec<RunPoint> {
        match (&self.kappa_t, &self.kappa_over_omega, self.omega_t) {
            (_, Some(ratios), Some(omega)) => ratios
                .iter()
                .map(|&r| RunPoint {
                    kappa_t: r * omega,
                    kappa_over_omega: Some(r),
                })
                .collect(),
            (Some(ks), _, _) => ks
                .iter()
                .map(|&k| RunPoint {
                    kappa_t: k,
                    kappa_over_omega: None,
                })
                .collect(),
            _ => vec![RunPoint {
                kappa_t: 0.0,
                kappa_over_omega: None,
            }],
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Validation(msg));
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return bad(format!("duration must be positive, got {}", self.duration));
        }
        if self.kappa_t.is_some() && self.kappa_over_omega.is_some() {
            return bad("give either kappa_t or kappa_over_omega, not both".into());
        }
        if self.kappa_over_omega.is_some() && self.omega_t.is_none() {
            return bad("kappa_over_omega needs omega_t".into());
        }
        for list in [&self.kappa_t, &self.kappa_over_omega].into_iter().flatten() {
            if list.is_empty() {
                return bad("decay list is empty".into());
            }
            if let Some(k) = list.iter().find(|k| !(**k >= 0.0) || !k.is_finite()) {
                return bad(format!("decay values must be finite and non-negative, got {k}"));
            }
        }
        for (name, v) in [("omega_t", self.omega_t), ("j_t", self.j_t)] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return bad(format!("{name} must be positive, got {v}"));
                }
            }
        }
        if self.mode == HamiltonianMode::RotatingFrame && self.omega_t.is_none() && self.j_t.is_none() {
            return bad("rotating-frame mode needs omega_t or j_t".into());
        }
        if self.grid.steps_per_stage == 0 {
            return bad("grid.steps_per_stage must be at least 1".into());
        }
        for o in &self.overrides {
            Symbol::from_str(&o.symbol).map_err(|e| CliError::Validation(format!("override on step `{}`: {e}", o.step)))?;
        }
        for p in self.points() {
            self.plan(p)?;
        }
        Ok(())
    }

    pub fn model(&self, point: RunPoint) -> Result<QubitModel, CliError> {
        let mut model = QubitModel::new(self.qubits())?.with_decay(point.kappa_t)?;
        if let Some(w) = self.omega_t {
            model = model.with_frequency(w)?;
        }
        if let Some(j) = self.j_t {
            model = model.with_coupling(j)?;
        }
        Ok(model)
    }

    /// The validated plan for one decay setting, with overrides applied.
    pub fn plan(&self, point: RunPoint) -> Result<ProtocolPlan, CliError> {
        let model = self.model(point)?;
        let mut plan = match self.protocol {
            ProtocolName::Bell => plan_bell(model, self.duration, self.boundary),
            ProtocolName::BellReverse => plan_bell_reverse(model, self.duration),
            ProtocolName::Ghz => plan_ghz(model, self.duration),
        }
        .map_err(CliError::invalid)?;
        if !self.overrides.is_empty() {
            for o in &self.overrides {
                let symbol = Symbol::from_str(&o.symbol).map_err(CliError::invalid)?;
                plan.override_schedule(&o.step, symbol, o.schedule.clone()).map_err(CliError::invalid)?;
            }
            plan.validate().map_err(CliError::invalid)?;
        }
        Ok(plan)
    }

    pub fn options(&self) -> RunOptions {
        RunOptions {
            mode: self.mode,
            noise: true,
            steps_per_stage: self.grid.steps_per_stage,
            enforce_strong_coupling: self.enforce_strong_coupling,
            track_residual: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, CliError> {
        RunConfig::parse(text, Path::new("test.cfg"))
    }

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = parse("protocol = \"bell\"\nduration = 1.0\n").unwrap();
        assert_eq!(cfg.qubits(), 2);
        assert_eq!(cfg.grid.steps_per_stage, DEFAULT_STEPS);
        assert_eq!(cfg.points().len(), 1);
        assert_eq!(cfg.points()[0].kappa_t, 0.0);
    }

    #[test]
    fn missing_duration_names_the_field() {
        let err = parse("protocol = \"ghz\"\nkappa_t = [0.0]\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let msg = err.to_string();
        assert!(msg.contains("duration") && msg.contains("line"), "{msg}");
    }

    #[test]
    fn ratio_decay_scales_with_frequency() {
        let cfg = parse("protocol = \"bell\"\nduration = 1.0\nomega_t = 2000.0\nkappa_over_omega = [5e-6, 5e-5]\n").unwrap();
        let ks: Vec<f64> = cfg.points().iter().map(|p| p.kappa_t).collect();
        assert!((ks[0] - 0.01).abs() < 1e-15 && (ks[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn validation_errors() {
        for text in [
            "protocol = \"bell\"\nduration = 1.0\nkappa_t = [-0.1]\n",
            "protocol = \"bell\"\nduration = 0.0\n",
            "protocol = \"ghz\"\nqubits = 2\nduration = 1.0\n",
            "protocol = \"bell\"\nduration = 1.0\nmode = \"rotating-frame\"\n",
            "protocol = \"bell\"\nduration = 1.0\nkappa_over_omega = [1e-5]\n",
            "protocol = \"bell\"\nduration = 1.0\n[[override]]\nstep = \"excitation\"\nsymbol = \"theta_tilde0\"\nschedule = { kind = \"constant\", value = 0.5 }\n",
            "protocol = \"bell\"\nduration = 1.0\n[[override]]\nstep = \"excitation\"\nsymbol = \"varphi\"\nschedule = { kind = \"constant\", value = 0.3 }\n",
            "protocol = \"bell\"\nduration = 1.0\n[[override]]\nstep = \"excitation\"\nsymbol = \"omega\"\nschedule = { kind = \"constant\", value = 0.5 }\n",
        ] {
            let err = parse(text).unwrap_err();
            assert!(matches!(err, CliError::Validation(_)), "{text}: {err}");
        }
        assert!(matches!(parse("protocol = \"bell\"\nduration = 1.0\ncolour = 3\n"), Err(CliError::Config { .. })));
    }

    #[test]
    fn harmless_override_keeps_the_plan_valid() {
        let text = "protocol = \"bell\"\nduration = 1.0\n[[override]]\nstep = \"excitation\"\nsymbol = \"varphi\"\nschedule = { kind = \"linear-ramp\", value = 1.5707963267948966, slope = 0.0 }\n";
        let cfg = parse(text).unwrap();
        let plan = cfg.plan(cfg.points()[0]).unwrap();
        assert_eq!(plan.steps[0].schedules.get(Symbol::DrivePhase).unwrap().value(0.5).unwrap(), std::f64::consts::FRAC_PI_2);
    }
}
