use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::ValueEnum;
use passage_core::export::{write_table, write_trajectory};
use passage_core::protocols::run_protocol;
use passage_core::{run_verify, VerifyConfig, VerifyReport};
use rayon::prelude::*;

use crate::config::{RunConfig, RunPoint};
use crate::error::CliError;
use crate::manifest::{diagnostic_failures, ConfigEcho, Manifest, RunRecord, SweepEcho};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    #[value(name = "kappa_t")]
    KappaT,
    #[value(name = "kappa_over_omega")]
    KappaOverOmega,
    #[value(name = "omega_t")]
    OmegaT,
    #[value(name = "grid")]
    Grid,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            Self::KappaT => "kappa_t",
            Self::KappaOverOmega => "kappa_over_omega",
            Self::OmegaT => "omega_t",
            Self::Grid => "grid",
        }
    }

    /// The config with this parameter set to `value`.
    fn apply(self, base: &RunConfig, value: f64) -> Result<RunConfig, CliError> {
        let mut cfg = base.clone();
        let single_point = || {
            if base.points().len() != 1 {
                return Err(CliError::Validation(format!(
                    "sweeping {} needs a single decay value in the config, found {}",
                    self.name(),
                    base.points().len()
                )));
            }
            Ok(())
        };
        match self {
            Self::KappaT => {
                cfg.kappa_t = Some(vec![value]);
                cfg.kappa_over_omega = None;
            }
            Self::KappaOverOmega => {
                cfg.kappa_over_omega = Some(vec![value]);
                cfg.kappa_t = None;
            }
            Self::OmegaT => {
                single_point()?;
                cfg.omega_t = Some(value);
            }
            Self::Grid => {
                single_point()?;
                if !(value >= 1.0) || value.fract() != 0.0 {
                    return Err(CliError::Validation(format!("grid values must be positive integers, got {value}")));
                }
                cfg.grid.steps_per_stage = value as usize;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Whether the swept value changes `κT`, so fidelity must fall as it grows.
    fn moves_decay(self, base: &RunConfig) -> bool {
        match self {
            Self::KappaT | Self::KappaOverOmega => true,
            Self::OmegaT => base.kappa_over_omega.is_some(),
            Self::Grid => false,
        }
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })
}

fn create_file(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Runs one decay setting and writes its trajectory.
fn execute(cfg: &RunConfig, point: RunPoint, index: usize, csv: &Path) -> Result<RunRecord, CliError> {
    let plan = cfg.plan(point)?;
    let run = run_protocol(&plan, &cfg.options())?;
    write_trajectory(create_file(csv)?, &run.result).map_err(io_error(csv))?;
    let failures = diagnostic_failures(&run);
    Ok(RunRecord {
        index,
        kappa_t: point.kappa_t,
        kappa_over_omega: point.kappa_over_omega,
        omega_t: cfg.omega_t,
        steps_per_stage: cfg.grid.steps_per_stage,
        csv: csv.file_name().expect("csv path has a file name").to_string_lossy().into_owned(),
        final_fidelity: run.final_fidelity(),
        steps: run.steps,
        diagnostics: run.result.diagnostics,
        passed: failures.is_empty(),
        failures,
    })
}

fn report_runs(runs: &[RunRecord]) {
    for r in runs {
        let status = if r.passed { "ok" } else { "FAILED" };
        println!("run {:>3}  kappa_t={:<12.6e} F={:.6}  {}  {status}", r.index, r.kappa_t, r.final_fidelity, r.csv);
        for f in &r.failures {
            println!("          {f}");
        }
    }
}

fn check_runs(runs: &[RunRecord]) -> Result<(), CliError> {
    let failed: Vec<String> = runs.iter().filter(|r| !r.passed).map(|r| r.index.to_string()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Diagnostic(format!("runs {} exceeded diagnostic thresholds", failed.join(", "))))
    }
}

pub struct Outputs {
    /// Falls back to the config's `out`, then `./out`.
    pub dir: Option<PathBuf>,
    pub grid: Option<usize>,
}

impl Outputs {
    fn resolve(&self, cfg: &mut RunConfig) -> PathBuf {
        if let Some(steps) = self.grid {
            cfg.grid.steps_per_stage = steps;
        }
        self.dir.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"))
    }
}

pub fn cmd_run(path: &Path, out: &Outputs) -> Result<(), CliError> {
    let started = Instant::now();
    let mut cfg = RunConfig::load(path)?;
    let dir = out.resolve(&mut cfg);
    cfg.validate()?;
    create_dir(&dir)?;
    let points = cfg.points();
    let runs = points
        .par_iter()
        .enumerate()
        .map(|(i, &p)| execute(&cfg, p, i, &dir.join(format!("{}_{i:03}.csv", cfg.protocol))))
        .collect::<Result<Vec<_>, _>>()?;
    report_runs(&runs);
    let manifest = Manifest {
        config: ConfigEcho {
            source: path.display().to_string(),
            command: "run".into(),
            settings: cfg,
            sweep: None,
        },
        runs,
        version: env!("CARGO_PKG_VERSION").into(),
        duration_seconds: started.elapsed().as_secs_f64(),
    };
    manifest.write(&dir.join("manifest.json"))?;
    check_runs(&manifest.runs)
}

pub fn cmd_sweep(path: &Path, param: SweepParam, values: &[f64], out: &Outputs) -> Result<(), CliError> {
    let started = Instant::now();
    if values.is_empty() {
        return Err(CliError::Validation("--values is empty".into()));
    }
    let mut cfg = RunConfig::load(path)?;
    let dir = out.resolve(&mut cfg);
    let configs = values.iter().map(|&v| param.apply(&cfg, v)).collect::<Result<Vec<_>, _>>()?;
    create_dir(&dir)?;
    let name = param.name();
    let runs = configs
        .par_iter()
        .enumerate()
        .map(|(i, c)| execute(c, c.points()[0], i, &dir.join(format!("sweep_{name}_{i:03}.csv"))))
        .collect::<Result<Vec<_>, _>>()?;
    report_runs(&runs);

    // the decay column is left out when it is the swept value itself
    let with_decay = param != SweepParam::KappaT;
    let mut header = vec![name.to_string()];
    if with_decay {
        header.push("kappa_t".into());
    }
    header.extend(["F_final".to_string(), "max_residual".to_string()]);
    header.extend(runs[0].steps.iter().map(|s| format!("F_{}", s.name)));
    let rows = values.iter().zip(&runs).map(|(&v, r)| {
        let mut row = vec![v];
        if with_decay {
            row.push(r.kappa_t);
        }
        row.extend([r.final_fidelity, r.diagnostics.max_residual.unwrap_or(f64::NAN)]);
        row.extend(r.steps.iter().map(|s| s.final_fidelity));
        row
    });
    let table = dir.join(format!("sweep_{name}.csv"));
    write_table(create_file(&table)?, &header, rows).map_err(io_error(&table))?;

    let manifest = Manifest {
        config: ConfigEcho {
            source: path.display().to_string(),
            command: "sweep".into(),
            settings: cfg.clone(),
            sweep: Some(SweepEcho {
                param: name.into(),
                values: values.to_vec(),
            }),
        },
        runs,
        version: env!("CARGO_PKG_VERSION").into(),
        duration_seconds: started.elapsed().as_secs_f64(),
    };
    manifest.write(&dir.join("manifest.json"))?;
    check_runs(&manifest.runs)?;
    if param.moves_decay(&cfg) {
        check_monotone(&manifest.runs)?;
    }
    Ok(())
}

/// Final fidelity must not rise with `κT`.
fn check_monotone(runs: &[RunRecord]) -> Result<(), CliError> {
    let mut by_decay: Vec<&RunRecord> = runs.iter().collect();
    by_decay.sort_by(|a, b| a.kappa_t.total_cmp(&b.kappa_t));
    for w in by_decay.windows(2) {
        if w[1].final_fidelity > w[0].final_fidelity + 1e-12 {
            return Err(CliError::Diagnostic(format!(
                "fidelity rises from {:.12} to {:.12} as kappa_t grows from {} to {}",
                w[0].final_fidelity, w[1].final_fidelity, w[0].kappa_t, w[1].kappa_t
            )));
        }
    }
    Ok(())
}

pub struct VerifyArgs {
    pub seed: u64,
    pub max_m: usize,
    pub max_n: usize,
    pub sizes: Option<Vec<(usize, usize)>>,
    pub instances: Option<usize>,
    pub inject_detuning: Option<f64>,
    pub out: Option<PathBuf>,
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<VerifyReport, CliError> {
    let mut cfg = VerifyConfig::with_bounds(args.seed, args.max_m, args.max_n);
    if let Some(sizes) = &args.sizes {
        cfg.sizes = sizes.clone();
    }
    if let Some(n) = args.instances {
        cfg.instances = n;
        cfg.reconstruction_instances = cfg.reconstruction_instances.min(n);
    }
    cfg.inject_detuning = args.inject_detuning;
    let report = run_verify(&cfg)?;
    println!("verify seed={} sizes={}", report.seed, cfg.sizes.len());
    for s in &report.suites {
        println!(
            "{:<16} instances={:<4} max_error={:.3e} threshold={:.1e}  {}  {}",
            s.name,
            s.instances,
            s.max_error,
            s.threshold,
            if s.passed { "PASS" } else { "FAIL" },
            s.detail
        );
    }
    if let Some(dir) = &args.out {
        create_dir(dir)?;
        let path = dir.join("verify.json");
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        fs::write(&path, text + "\n").map_err(io_error(&path))?;
    }
    if !report.passed() {
        return Err(CliError::Diagnostic(format!("failed suites: {}", report.failed_suites().join(", "))));
    }
    Ok(report)
}

/// Parses `"1x2,2x3"`; an empty string is an empty list.
pub fn parse_sizes(text: &str) -> Result<Vec<(usize, usize)>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let (m, n) = s
                .split_once('x')
                .ok_or_else(|| CliError::Validation(format!("size `{s}` is not of the form MxN")))?;
            let parse = |v: &str| v.trim().parse::<usize>().map_err(|_| CliError::Validation(format!("size `{s}` is not of the form MxN")));
            Ok((parse(m)?, parse(n)?))
        })
        .collect()
}
