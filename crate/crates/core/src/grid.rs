use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Steps per unit step duration used when no grid is given.
pub const DEFAULT_STEPS: usize = 2000;

/// Uniform grid `t0, t0 + dt, …, t1` with `steps` intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t0: f64,
    t1: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Grid("a grid needs at least one step".into()));
        }
        if !(t1 > t0) {
            return Err(Error::Grid(format!("grid end {t1} must exceed start {t0}")));
        }
        Ok(Self { t0, t1, steps })
    }

    pub fn start(&self) -> f64 {
        self.t0
    }

    pub fn end(&self) -> f64 {
        self.t1
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of grid points, `steps + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i == self.steps {
            self.t1
        } else {
            self.t0 + i as f64 * self.dt()
        }
    }

    /// Centre of interval `i`.
    pub fn midpoint(&self, i: usize) -> f64 {
        self.t0 + (i as f64 + 0.5) * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Fails unless the grid lies inside `[start, end]` (with round-off slack).
    pub fn check_within(&self, start: f64, end: f64) -> Result<()> {
        let slack = 1e-9 * (end - start).abs().max(1.0);
        if self.t0 < start - slack || self.t1 > end + slack {
            return Err(Error::Grid(format!(
                "grid [{}, {}] leaves the domain [{start}, {end}]",
                self.t0, self.t1
            )));
        }
        Ok(())
    }
}
