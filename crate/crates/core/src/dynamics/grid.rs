use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Uniform time grid `t_start, …, t_end` with `n_points ≥ 2` samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    n_points: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridRepr {
    t_start: f64,
    t_end: f64,
    n_points: usize,
}

impl TryFrom<GridRepr> for TimeGrid {
    type Error = Error;

    fn try_from(r: GridRepr) -> Result<Self> {
        TimeGrid::new(r.t_start, r.t_end, r.n_points)
    }
}

impl From<TimeGrid> for GridRepr {
    fn from(g: TimeGrid) -> Self {
        GridRepr {
            t_start: g.t_start,
            t_end: g.t_end,
            n_points: g.n_points,
        }
    }
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_points: usize) -> Result<Self> {
        if !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::InvalidGrid("endpoints must be finite".into()));
        }
        if t_start < 0.0 {
            return Err(Error::InvalidGrid(format!("t_start {t_start} is negative")));
        }
        if t_end <= t_start {
            return Err(Error::InvalidGrid(format!(
                "t_end {t_end} must exceed t_start {t_start}"
            )));
        }
        if n_points < 2 {
            return Err(Error::InvalidGrid(format!("n_points {n_points} < 2")));
        }
        Ok(Self {
            t_start,
            t_end,
            n_points,
        })
    }

    /// Grid with the given spacing; `t_end` is rounded to the nearest whole
    /// number of steps.
    pub fn with_step(t_start: f64, t_end: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::InvalidGrid(format!("step {step} must be positive")));
        }
        let n = ((t_end - t_start) / step).round() as usize;
        Self::new(t_start, t_start + n as f64 * step, n + 1)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n_points - 1) as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        assert!(k < self.n_points);
        if k + 1 == self.n_points {
            self.t_end
        } else {
            self.t_start + k as f64 * self.step()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.point(k)).collect()
    }

    /// Consecutive pairs `(t_k, t_{k+1})`.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        (0..self.n_points - 1)
            .map(|k| (self.point(k), self.point(k + 1)))
            .collect()
    }

    /// Index of the grid point nearest to `t`, if it lies within a hundredth
    /// of a step.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let h = self.step();
        let k = ((t - self.t_start) / h).round();
        if k < 0.0 || k as usize >= self.n_points {
            return None;
        }
        let k = k as usize;
        ((self.point(k) - t).abs() <= 0.01 * h).then_some(k)
    }

    /// Trailing part of the grid starting at index `k`.
    pub fn tail(&self, k: usize) -> Result<Self> {
        if k + 2 > self.n_points {
            return Err(Error::InvalidGrid(format!(
                "tail from index {k} leaves fewer than two points"
            )));
        }
        Self::new(self.point(k), self.t_end, self.n_points - k)
    }
}

impl FromStr for TimeGrid {
    type Err = Error;

    /// Parses `t0:t1:n`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidGrid(format!("expected t0:t1:n, got {s:?}")));
        }
        let bad = |what: &str| Error::InvalidGrid(format!("cannot parse {what} in {s:?}"));
        let t0: f64 = parts[0].trim().parse().map_err(|_| bad("t0"))?;
        let t1: f64 = parts[1].trim().parse().map_err(|_| bad("t1"))?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad("n"))?;
        Self::new(t0, t1, n)
    }
}

impl fmt::Display for TimeGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.t_start, self.t_end, self.n_points)
    }
}
