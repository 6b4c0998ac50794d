//! Time-dependent control parameters.
//!
//! Every angle and phase that enters the ancillary frame or the drive
//! synthesis is a [`ParameterSchedule`]: a shape ([`ScheduleKind`]) bound to a
//! time domain. Named shapes carry analytic derivatives; sampled shapes use a
//! centered finite difference.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::TOL;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScheduleKind {
    Constant {
        value: f64,
    },
    /// `offset + amplitude·cos(π(t − origin)/(2·period))`.
    CosineRamp {
        amplitude: f64,
        #[serde(default)]
        offset: f64,
        /// Defaults to the owning step's duration.
        #[serde(default)]
        period: Option<f64>,
        #[serde(default)]
        origin: f64,
    },
    /// `value + slope·(t − origin)`.
    LinearRamp {
        value: f64,
        slope: f64,
        #[serde(default)]
        origin: f64,
    },
    /// Piecewise-linear interpolation through `(times[i], values[i])`.
    Sampled { times: Vec<f64>, values: Vec<f64> },
}

impl ScheduleKind {
    pub fn constant(value: f64) -> Self {
        Self::Constant { value }
    }

    pub fn cosine(amplitude: f64, period: f64) -> Self {
        Self::CosineRamp {
            amplitude,
            offset: 0.0,
            period: Some(period),
            origin: 0.0,
        }
    }

    pub fn linear(value: f64, slope: f64) -> Self {
        Self::LinearRamp {
            value,
            slope,
            origin: 0.0,
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Self::Constant { .. } => true,
            Self::CosineRamp { amplitude, .. } => *amplitude == 0.0,
            Self::LinearRamp { slope, .. } => *slope == 0.0,
            Self::Sampled { values, .. } => values.windows(2).all(|w| w[0] == w[1]),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::CosineRamp {
                period: Some(p), ..
            } if !(*p > 0.0) => Err(Error::Invalid(format!("cosine-ramp period {p} must be positive"))),
            Self::Sampled { times, values } => {
                if times.len() != values.len() || times.len() < 2 {
                    return Err(Error::Invalid(
                        "sampled schedule needs at least two (time, value) pairs of equal length".into(),
                    ));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Invalid("sample times must be strictly increasing".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn value(&self, t: f64) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::CosineRamp {
                amplitude,
                offset,
                period,
                origin,
            } => {
                let p = period.expect("cosine-ramp period resolved at construction");
                offset + amplitude * (PI * (t - origin) / (2.0 * p)).cos()
            }
            Self::LinearRamp {
                value,
                slope,
                origin,
            } => value + slope * (t - origin),
            Self::Sampled { times, values } => interpolate(times, values, t),
        }
    }
}

fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    if t <= times[0] {
        return values[0];
    }
    let last = times.len() - 1;
    if t >= times[last] {
        return values[last];
    }
    let i = times.partition_point(|&x| x <= t) - 1;
    let w = (t - times[i]) / (times[i + 1] - times[i]);
    values[i] * (1.0 - w) + values[i + 1] * w
}

/// A schedule shape bound to the closed time domain `[start, end]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSchedule {
    kind: ScheduleKind,
    start: f64,
    end: f64,
}

impl ParameterSchedule {
    /// Binds `kind` to `[start, end]`; a cosine ramp without a period takes `end − start`.
    pub fn new(mut kind: ScheduleKind, start: f64, end: f64) -> Result<Self> {
        if !(end > start) {
            return Err(Error::Invalid(format!("empty schedule domain [{start}, {end}]")));
        }
        if let ScheduleKind::CosineRamp { period, .. } = &mut kind {
            period.get_or_insert(end - start);
        }
        kind.validate()?;
        Ok(Self { kind, start, end })
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.start, self.end)
    }

    pub fn is_constant(&self) -> bool {
        self.kind.is_constant()
    }

    fn slack(&self) -> f64 {
        1e-9 * (self.end - self.start)
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if t < self.start - self.slack() || t > self.end + self.slack() || t.is_nan() {
            return Err(Error::OutOfDomain {
                t,
                start: self.start,
                end: self.end,
            });
        }
        Ok(())
    }

    /// Value and first time derivative at `t`.
    pub fn eval(&self, t: f64) -> Result<(f64, f64)> {
        self.check_domain(t)?;
        let value = self.kind.value(t);
        let derivative = match &self.kind {
            ScheduleKind::Constant { .. } => 0.0,
            ScheduleKind::CosineRamp {
                amplitude,
                period,
                origin,
                ..
            } => {
                let p = period.expect("resolved");
                let w = PI / (2.0 * p);
                -amplitude * w * (w * (t - origin)).sin()
            }
            ScheduleKind::LinearRamp { slope, .. } => *slope,
            ScheduleKind::Sampled { .. } => {
                let h = TOL.sampled_fd_step * (self.end - self.start);
                let lo = (t - h).max(self.start);
                let hi = (t + h).min(self.end);
                (self.kind.value(hi) - self.kind.value(lo)) / (hi - lo)
            }
        };
        Ok((value, derivative))
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        self.eval(t).map(|(v, _)| v)
    }
}

/// Names of the control parameters of an `M+N` system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    /// Assistant cascade mixing angle θ̃_m.
    ThetaTilde(usize),
    /// Assistant cascade phase α̃_m.
    AlphaTilde(usize),
    /// Working cascade mixing angle θ_n.
    Theta(usize),
    /// Working cascade phase α_n.
    Alpha(usize),
    /// Mixing angle φ between the two terminal bright states.
    Mixing,
    /// Relative phase α between the two terminal bright states.
    RelativePhase,
    /// Master drive phase ϕ.
    DrivePhase,
}

impl Symbol {
    /// Every symbol a frame of `m` assistant and `n` working levels reads.
    pub fn required(m: usize, n: usize) -> Vec<Symbol> {
        let mut out = Vec::with_capacity(2 * (m + n));
        for i in 0..m.saturating_sub(1) {
            out.push(Symbol::ThetaTilde(i));
            out.push(Symbol::AlphaTilde(i));
        }
        for i in 0..n.saturating_sub(1) {
            out.push(Symbol::Theta(i));
            out.push(Symbol::Alpha(i));
        }
        out.extend([Symbol::Mixing, Symbol::RelativePhase, Symbol::DrivePhase]);
        out
    }

    /// Cascade parameters that must stay constant for the general synthesis.
    pub fn is_cascade(self) -> bool {
        matches!(
            self,
            Symbol::ThetaTilde(_) | Symbol::AlphaTilde(_) | Symbol::Theta(_) | Symbol::Alpha(_)
        )
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::ThetaTilde(i) => write!(f, "theta_tilde{i}"),
            Symbol::AlphaTilde(i) => write!(f, "alpha_tilde{i}"),
            Symbol::Theta(i) => write!(f, "theta{i}"),
            Symbol::Alpha(i) => write!(f, "alpha{i}"),
            Symbol::Mixing => f.write_str("phi"),
            Symbol::RelativePhase => f.write_str("alpha"),
            Symbol::DrivePhase => f.write_str("varphi"),
        }
    }
}

impl FromStr for Symbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let indexed = |prefix: &str| -> Option<usize> { s.strip_prefix(prefix)?.parse().ok() };
        match s {
            "phi" => return Ok(Symbol::Mixing),
            "alpha" => return Ok(Symbol::RelativePhase),
            "varphi" => return Ok(Symbol::DrivePhase),
            _ => {}
        }
        if let Some(i) = indexed("theta_tilde") {
            Ok(Symbol::ThetaTilde(i))
        } else if let Some(i) = indexed("alpha_tilde") {
            Ok(Symbol::AlphaTilde(i))
        } else if let Some(i) = indexed("theta") {
            Ok(Symbol::Theta(i))
        } else if let Some(i) = indexed("alpha") {
            Ok(Symbol::Alpha(i))
        } else {
            Err(Error::MissingSymbol(s.to_string()))
        }
    }
}

/// The schedules of one protocol step over `[start, start + duration]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSet {
    m: usize,
    n: usize,
    start: f64,
    duration: f64,
    entries: BTreeMap<Symbol, ParameterSchedule>,
}

impl ScheduleSet {
    pub fn new(m: usize, n: usize, start: f64, duration: f64) -> Result<Self> {
        if !(duration > 0.0) {
            return Err(Error::Invalid(format!("step duration {duration} must be positive")));
        }
        Ok(Self {
            m,
            n,
            start,
            duration,
            entries: BTreeMap::new(),
        })
    }

    pub fn with(mut self, symbol: Symbol, kind: ScheduleKind) -> Result<Self> {
        self.insert(symbol, kind)?;
        Ok(self)
    }

    pub fn insert(&mut self, symbol: Symbol, kind: ScheduleKind) -> Result<()> {
        let sched = ParameterSchedule::new(kind, self.start, self.end())?;
        self.entries.insert(symbol, sched);
        Ok(())
    }

    pub fn assistant_levels(&self) -> usize {
        self.m
    }

    pub fn working_levels(&self) -> usize {
        self.n
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn get(&self, symbol: Symbol) -> Result<&ParameterSchedule> {
        self.entries
            .get(&symbol)
            .ok_or_else(|| Error::MissingSymbol(symbol.to_string()))
    }

    pub fn eval(&self, symbol: Symbol, t: f64) -> Result<(f64, f64)> {
        self.get(symbol)?.eval(t)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &ParameterSchedule)> {
        self.entries.iter()
    }

    /// Fails with the first symbol the `(M, N)` frame needs but the set lacks.
    pub fn check_complete(&self) -> Result<()> {
        for s in Symbol::required(self.m, self.n) {
            self.get(s)?;
        }
        Ok(())
    }

    /// Fails on the first cascade symbol whose schedule varies in time.
    pub fn check_static_cascade(&self) -> Result<()> {
        for (sym, sched) in &self.entries {
            if sym.is_cascade() && !sched.is_constant() {
                return Err(Error::NonConstant(sym.to_string()));
            }
        }
        Ok(())
    }
}
