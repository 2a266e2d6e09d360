//! Time-parametrized dynamical families `{Λ_t}` with `Λ₀ = id`.

mod generator;
mod grid;
pub mod models;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use serde::Serialize;

pub use generator::{integrate_to, GeneratorSpec, HamiltonianFn, JumpTerm, Rate};
pub use grid::TimeGrid;
pub use models::ModelSpec;

use crate::channel::QuantumChannel;
use crate::operator::{singular_values, ComplexMatrix};
use crate::{Error, Result};

/// Time quantum used to key the cache of analytic families.
const ANALYTIC_QUANTUM: f64 = 1e-12;
/// Trace-preservation drift above which integration is abandoned.
const TP_DRIFT_LIMIT: f64 = 1e-6;
pub const DEFAULT_STEP: f64 = 1e-3;

type ChannelFn = Arc<dyn Fn(f64) -> QuantumChannel + Send + Sync>;

enum Source {
    Analytic(ChannelFn),
    Generator { spec: GeneratorSpec, step: f64 },
}

enum Cache {
    Analytic(BTreeMap<i64, Arc<QuantumChannel>>),
    /// `steps[n]` is the superoperator at `t = n·step`.
    Generator(Vec<Arc<QuantumChannel>>),
}

/// A dynamical family with a memoized `time → channel` table.
///
/// Reads take a shared lock; new entries are computed and inserted under the
/// write lock, so concurrent callers see one consistent table.
pub struct DynamicalFamily {
    dim: usize,
    label: String,
    source: Source,
    cache: RwLock<Cache>,
}

impl fmt::Debug for DynamicalFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DynamicalFamily")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

impl DynamicalFamily {
    /// Family given by a closed-form map `t ↦ Λ_t`. The closure must return
    /// the identity at `t = 0`.
    pub fn analytic(
        dim: usize,
        label: impl Into<String>,
        f: impl Fn(f64) -> QuantumChannel + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            label: label.into(),
            source: Source::Analytic(Arc::new(f)),
            cache: RwLock::new(Cache::Analytic(BTreeMap::new())),
        }
    }

    /// Family obtained by fixed-step RK4 integration of `dΛ/dt = L_t Λ`.
    pub fn from_generator(spec: GeneratorSpec, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Config(format!("integrator step {step} must be positive")));
        }
        let dim = spec.dim();
        let id = Arc::new(QuantumChannel::identity(dim));
        Ok(Self {
            dim,
            label: format!("generator(step={step})"),
            source: Source::Generator { spec, step },
            cache: RwLock::new(Cache::Generator(vec![id])),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn is_generator_driven(&self) -> bool {
        matches!(self.source, Source::Generator { .. })
    }

    /// Integrator step for generator-driven families.
    pub fn step(&self) -> Option<f64> {
        match self.source {
            Source::Generator { step, .. } => Some(step),
            Source::Analytic(_) => None,
        }
    }

    /// `Λ_t`. Generator-driven families are evaluated at the nearest
    /// multiple of the integrator step.
    pub fn evaluate(&self, t: f64) -> Result<Arc<QuantumChannel>> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("evaluation time {t} must be finite and >= 0")));
        }
        match &self.source {
            Source::Analytic(f) => {
                let key = (t / ANALYTIC_QUANTUM).round() as i64;
                if let Cache::Analytic(map) = &*self.cache.read().expect("cache lock") {
                    if let Some(ch) = map.get(&key) {
                        return Ok(ch.clone());
                    }
                }
                let ch = if key == 0 {
                    QuantumChannel::identity(self.dim)
                } else {
                    f(t)
                };
                check_channel(&ch, t)?;
                let mut guard = self.cache.write().expect("cache lock");
                let Cache::Analytic(map) = &mut *guard else {
                    unreachable!("analytic family with generator cache")
                };
                Ok(map.entry(key).or_insert_with(|| Arc::new(ch)).clone())
            }
            Source::Generator { spec, step } => {
                let n = (t / step).round() as usize;
                if let Cache::Generator(steps) = &*self.cache.read().expect("cache lock") {
                    if let Some(ch) = steps.get(n) {
                        return Ok(ch.clone());
                    }
                }
                let mut guard = self.cache.write().expect("cache lock");
                let Cache::Generator(steps) = &mut *guard else {
                    unreachable!("generator family with analytic cache")
                };
                while steps.len() <= n {
                    let k = steps.len() - 1;
                    let prev = steps[k].superop();
                    let next = generator::rk4_step(spec, prev, k as f64 * step, *step)?;
                    let ch = QuantumChannel::from_superop_unchecked(self.dim, next);
                    check_channel(&ch, (k + 1) as f64 * step)?;
                    steps.push(Arc::new(ch));
                }
                Ok(steps[n].clone())
            }
        }
    }

    /// Evaluates every grid point, in order, filling the cache.
    pub fn prewarm(&self, grid: &TimeGrid) -> Result<()> {
        if let Some(h) = self.step() {
            self.evaluate(grid.t_end() + 0.5 * h)?;
        }
        for t in grid.points() {
            self.evaluate(t)?;
        }
        Ok(())
    }

    /// Cached table as `[{t, channel}]`, sorted by time.
    pub fn export_table(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Entry<'a> {
            t: f64,
            channel: &'a QuantumChannel,
        }
        let guard = self.cache.read().expect("cache lock");
        let entries: Vec<serde_json::Value> = match (&*guard, &self.source) {
            (Cache::Analytic(map), _) => map
                .iter()
                .map(|(k, ch)| {
                    serde_json::to_value(Entry {
                        t: *k as f64 * ANALYTIC_QUANTUM,
                        channel: ch,
                    })
                    .expect("serializable")
                })
                .collect(),
            (Cache::Generator(steps), Source::Generator { step, .. }) => steps
                .iter()
                .enumerate()
                .map(|(n, ch)| {
                    serde_json::to_value(Entry {
                        t: n as f64 * step,
                        channel: ch,
                    })
                    .expect("serializable")
                })
                .collect(),
            _ => unreachable!("cache kind matches source"),
        };
        serde_json::json!({ "label": self.label, "dim": self.dim, "table": entries })
    }
}

fn check_channel(ch: &QuantumChannel, t: f64) -> Result<()> {
    if ch.superop().data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::IntegrationFailure(format!("non-finite superoperator at t={t}")));
    }
    let drift = ch.tp_defect();
    if drift > TP_DRIFT_LIMIT {
        return Err(Error::IntegrationFailure(format!(
            "trace-preservation drift {drift:.3e} at t={t} exceeds {TP_DRIFT_LIMIT:e}"
        )));
    }
    Ok(())
}

/// Generator-driven family whose table covers `grid`.
pub fn integrate_generator(spec: GeneratorSpec, grid: &TimeGrid, step: f64) -> Result<DynamicalFamily> {
    let fam = DynamicalFamily::from_generator(spec, step)?;
    fam.prewarm(grid)?;
    Ok(fam)
}

/// Numerical rank of a superoperator: singular values above `tol·σ_max`.
pub fn superop_rank(m: &ComplexMatrix, tol: f64) -> usize {
    let sv = singular_values(m);
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// Superoperator rank at every grid point.
pub fn rank_profile(f: &DynamicalFamily, grid: &TimeGrid, tol: f64) -> Result<Vec<usize>> {
    grid.points()
        .into_iter()
        .map(|t| Ok(superop_rank(f.evaluate(t)?.superop(), tol)))
        .collect()
}
