//! Trace-distance trajectories, the information flow rate and the BLP
//! backflow integral.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicalFamily, TimeGrid};
use crate::operator::{DensityOperator, HermitianOperator};
use crate::witness::evolved_norm;
use crate::{Error, Result};

/// `½‖ρ₁ − ρ₂‖₁`.
pub fn trace_distance(r1: &DensityOperator, r2: &DensityOperator) -> Result<f64> {
    if r1.dim() != r2.dim() {
        return Err(Error::Shape(format!(
            "trace distance between dims {} and {}",
            r1.dim(),
            r2.dim()
        )));
    }
    Ok(0.5 * r1.as_hermitian().combine(1.0, r2.as_hermitian(), -1.0).trace_norm())
}

/// Two states with prior `p` on the first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HelstromSplit {
    pub rho1: DensityOperator,
    pub rho2: DensityOperator,
    pub p: f64,
}

impl HelstromSplit {
    pub fn new(rho1: DensityOperator, rho2: DensityOperator, p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("prior p = {p} must lie in (0, 1)")));
        }
        if rho1.dim() != rho2.dim() {
            return Err(Error::Shape("Helstrom split needs equal dimensions".into()));
        }
        Ok(Self { rho1, rho2, p })
    }

    /// `Δ_p = pρ₁ − (1−p)ρ₂`.
    pub fn delta(&self) -> HermitianOperator {
        self.rho1
            .as_hermitian()
            .combine(self.p, self.rho2.as_hermitian(), -(1.0 - self.p))
    }
}

/// `‖Δ_p‖₁`; the minimum discrimination error is `(1 − ‖Δ_p‖₁)/2`.
pub fn helstrom_norm(h: &HelstromSplit) -> f64 {
    h.delta().trace_norm()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Largest single-step increase.
    pub fn max_increase(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_non_increasing(&self, slack: f64) -> bool {
        self.max_increase() <= slack
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "value"])?;
        for (t, v) in self.grid.points().into_iter().zip(&self.values) {
            out.write_record([t.to_string(), format!("{v:e}")])?;
        }
        out.flush()?;
        Ok(())
    }

    /// `[[t, value], ...]` for plotting.
    pub fn to_json(&self) -> serde_json::Value {
        let pts: Vec<[f64; 2]> = self
            .grid
            .points()
            .into_iter()
            .zip(&self.values)
            .map(|(t, &v)| [t, v])
            .collect();
        serde_json::json!(pts)
    }
}

/// `‖(I_k ⊗ Λ_t)(ρ₁ − ρ₂)‖₁` on the grid; `ancilla = None` evolves system
/// states directly.
pub fn trajectory(
    f: &DynamicalFamily,
    rho1: &DensityOperator,
    rho2: &DensityOperator,
    grid: &TimeGrid,
    ancilla: Option<usize>,
) -> Result<Trajectory> {
    let k = ancilla.unwrap_or(1);
    let expected = k * f.dim();
    if rho1.dim() != expected || rho2.dim() != expected {
        return Err(Error::Shape(format!(
            "states of dim {} and {} do not match ancilla {k} x system {}",
            rho1.dim(),
            rho2.dim(),
            f.dim()
        )));
    }
    f.prewarm(grid)?;
    let values = grid
        .points()
        .par_iter()
        .map(|&t| evolved_norm(&*f.evaluate(t)?, k, rho1, rho2))
        .collect::<Result<Vec<f64>>>()?;
    Trajectory::new(*grid, values)
}

/// Time derivative by central differences, one-sided at the endpoints.
pub fn flow_rate(traj: &Trajectory) -> Result<Trajectory> {
    let v = &traj.values;
    let n = v.len();
    if n < 3 {
        return Err(Error::InvalidGrid("flow rate needs at least three points".into()));
    }
    let h = traj.grid.step();
    let mut out = Vec::with_capacity(n);
    out.push((v[1] - v[0]) / h);
    for k in 1..n - 1 {
        out.push((v[k + 1] - v[k - 1]) / (2.0 * h));
    }
    out.push((v[n - 1] - v[n - 2]) / h);
    Trajectory::new(traj.grid, out)
}

/// Trapezoid integral of the positive part of [`flow_rate`].
pub fn blp_integral(traj: &Trajectory) -> Result<f64> {
    let rate = flow_rate(traj)?;
    let h = traj.grid.step();
    let pos: Vec<f64> = rate.values.iter().map(|r| r.max(0.0)).collect();
    Ok(pos.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).sum())
}
