use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `steps` evenly spaced points from `start` to `stop`, both ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearGrid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl LinearGrid {
    pub fn new(start: f64, stop: f64, steps: usize) -> Result<Self> {
        let grid = Self { start, stop, steps };
        grid.validate()?;
        Ok(grid)
    }

    pub fn point(start: f64) -> Self {
        Self { start, stop: start, steps: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::NonFinite("grid bound"));
        }
        if self.steps == 0 {
            return Err(Error::Domain("grid has zero steps".into()));
        }
        if self.stop < self.start {
            return Err(Error::Domain(format!("inverted grid: stop {} < start {}", self.stop, self.start)));
        }
        if self.steps == 1 && self.stop != self.start {
            return Err(Error::Domain("single-step grid needs start == stop".into()));
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.steps == 1 {
            return self.start;
        }
        if i + 1 == self.steps {
            return self.stop;
        }
        self.start + (self.stop - self.start) * i as f64 / (self.steps - 1) as f64
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.steps).map(|i| self.value(i))
    }
}
