use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform evaluation grid `start, start + step, ..., <= stop`.
///
/// Points are generated as `start + i * step` rather than by repeated
/// addition, so the same spec always yields bit-identical points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(Error::DegenerateGrid("non-finite grid bound".into()));
        }
        if step <= 0.0 {
            return Err(Error::DegenerateGrid(format!("step {step} must be positive")));
        }
        if stop < start {
            return Err(Error::DegenerateGrid(format!(
                "stop {stop} lies below start {start}"
            )));
        }
        Ok(Self { start, stop, step })
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step * (1.0 + 1e-12) + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    pub fn width(&self) -> f64 {
        self.stop - self.start
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::DegenerateGrid(format!(
                "expected start:stop:step, got `{s}`"
            )));
        }
        let parse = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| Error::DegenerateGrid(format!("bad number `{p}`: {e}")))
        };
        Grid::new(parse(parts[0])?, parse(parts[1])?, parse(parts[2])?)
    }
}
