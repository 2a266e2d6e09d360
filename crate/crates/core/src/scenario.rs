//! Scenario files and the batch pipeline: scan, witness, verify, report.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::distinguishability::{blp_integral, trajectory, Trajectory};
use crate::divisibility::{scan_all_pairs, scan_cp_divisibility, DivisibilityReport, PairRecord, ScanOptions, StepStatus};
use crate::dynamics::{DynamicalFamily, ModelSpec, TimeGrid, DEFAULT_STEP};
use crate::witness::{
    construct_witness_with_ancilla, kernel_witness, separable_witness, verify_witness, SeparabilityCertificate,
    WitnessCertificate, WitnessPair, DEFAULT_ETA,
};
use crate::{Error, Result, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Route {
    #[default]
    Analytic,
    Generator {
        #[serde(default = "default_step")]
        step: f64,
    },
}

fn default_step() -> f64 {
    DEFAULT_STEP
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessSteps {
    /// One witness per step classified non-CP.
    NonCp,
    /// One witness per classified step.
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineFlags {
    pub scan: bool,
    pub witness: bool,
    pub witness_steps: WitnessSteps,
    pub separable: bool,
    /// Keep the per-step RHP indicator in the report.
    pub rhp: bool,
    /// Trajectory of the first witness pair and its backflow integral.
    pub blp: bool,
    /// Look for rank increases and build a kernel witness across them.
    pub rank: bool,
    pub all_pairs: bool,
}

impl Default for PipelineFlags {
    fn default() -> Self {
        Self {
            scan: true,
            witness: true,
            witness_steps: WitnessSteps::NonCp,
            separable: false,
            rhp: true,
            blp: true,
            rank: true,
            all_pairs: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub dir: PathBuf,
    pub report: String,
    pub scan_csv: String,
    pub trajectory_csv: String,
}

impl Default for OutputPaths {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            report: "report.json".into(),
            scan_csv: "scan.csv".into(),
            trajectory_csv: "trajectory.csv".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub model: ModelSpec,
    #[serde(default)]
    pub route: Route,
    pub grid: TimeGrid,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub pipeline: PipelineFlags,
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// Ancilla dimension for witnesses; defaults to `d + 1`.
    #[serde(default)]
    pub ancilla_dim: Option<usize>,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub seed: u64,
}

fn default_eta() -> f64 {
    DEFAULT_ETA
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::Config(format!("eta = {} must lie in (0, 1)", self.eta)));
        }
        let d = self.dim();
        if let Some(k) = self.ancilla_dim {
            if k < d + 1 {
                return Err(Error::Config(format!("ancilla_dim {k} must be >= d+1 = {}", d + 1)));
            }
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("hermitian", t.hermitian),
            ("trace", t.trace),
            ("psd", t.psd),
            ("cp", t.cp),
            ("tp", t.tp),
            ("rank", t.rank),
            ("gain", t.gain),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("tolerance {name} = {v} must be finite and >= 0")));
            }
        }
        if !(t.cond_limit > 1.0) {
            return Err(Error::Config(format!("cond_limit = {} must exceed 1", t.cond_limit)));
        }
        if let Route::Generator { step } = self.route {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::Config(format!("generator step {step} must be positive")));
            }
            if self.model.generator().is_none() {
                return Err(Error::Config(format!(
                    "model {} has no generator route; use {{\"kind\": \"analytic\"}}",
                    self.model.id()
                )));
            }
            for (what, x) in [("t_start", self.grid.t_start()), ("grid spacing", self.grid.step())] {
                let n = x / step;
                if (n - n.round()).abs() > 1e-6 {
                    return Err(Error::Config(format!(
                        "{what} {x} is not a multiple of the generator step {step}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self.model {
            ModelSpec::Identity { dim } | ModelSpec::CompletelyDepolarizing { dim } => dim,
            _ => 2,
        }
    }

    pub fn ancilla(&self) -> usize {
        self.ancilla_dim.unwrap_or(self.dim() + 1)
    }

    pub fn family(&self) -> Result<DynamicalFamily> {
        match self.route {
            Route::Analytic => self.model.analytic_family(),
            Route::Generator { step } => {
                let spec = self.model.generator().ok_or_else(|| {
                    Error::Config(format!("model {} has no generator route", self.model.id()))
                })?;
                Ok(DynamicalFamily::from_generator(spec, step)?
                    .with_label(format!("{} via generator, step {step}", self.model.describe())))
            }
        }
    }

    pub fn scan_options(&self) -> ScanOptions {
        ScanOptions::new(&self.tolerances, self.seed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CpDivisible,
    /// Some step is not CP, and no witness was requested.
    NotCpDivisible,
    BackflowWitnessed,
    /// The witness stage ran but no gain exceeded the tolerance.
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::CpDivisible | Verdict::Inconclusive => 0,
            Verdict::NotCpDivisible | Verdict::BackflowWitnessed => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        Self {
            name: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepError {
    pub s: f64,
    pub t: f64,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableRecord {
    pub separability: SeparabilityCertificate,
    pub certificate: WitnessCertificate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelWitnessSummary {
    pub s: f64,
    pub t: f64,
    pub epsilon: f64,
    pub norm_at_s: f64,
    pub norm_at_t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedTrajectory {
    pub name: String,
    pub anchor_s: f64,
    pub ancilla_dim: Option<usize>,
    pub trajectory: Trajectory,
    pub blp: Option<f64>,
}

/// Everything a run produces. Wall-clock time is kept out so that equal
/// inputs give byte-identical reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: ToolInfo,
    pub config: ScenarioConfig,
    pub family: String,
    pub verdict: Verdict,
    pub divisibility: Option<DivisibilityReport>,
    pub all_pairs: Option<Vec<PairRecord>>,
    pub witnesses: Vec<WitnessCertificate>,
    pub witness_errors: Vec<StepError>,
    pub separable_witnesses: Vec<SeparableRecord>,
    pub kernel_witness: Option<KernelWitnessSummary>,
    pub trajectories: Vec<NamedTrajectory>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Human-readable summary lines.
    pub fn summary(&self) -> Vec<String> {
        let mut out = vec![format!("model: {}", self.family)];
        if let Some(div) = &self.divisibility {
            let non_cp = div.non_cp_steps().count();
            let unclassified = div.steps.iter().filter(|s| s.status != StepStatus::Classified).count();
            out.push(format!(
                "scan: {} steps, {non_cp} non-CP, {unclassified} unclassified, {} non-CP intervals",
                div.steps.len(),
                div.non_cp_intervals.len()
            ));
            if let Some((s, t)) = div.divisibility_obstruction {
                out.push(format!("rank increases over [{s}, {t}]: not divisible"));
            }
        }
        if !self.witnesses.is_empty() {
            let best = self.witnesses.iter().map(|c| c.gain).fold(f64::NEG_INFINITY, f64::max);
            let hits = self.witnesses.iter().filter(|c| c.witnessed).count();
            out.push(format!(
                "witnesses: {hits}/{} show backflow, max gain {best:.6e}",
                self.witnesses.len()
            ));
        }
        if !self.separable_witnesses.is_empty() {
            let best = self
                .separable_witnesses
                .iter()
                .map(|r| r.certificate.gain)
                .fold(f64::NEG_INFINITY, f64::max);
            out.push(format!("separable witnesses: max gain {best:.6e}"));
        }
        if let Some(k) = &self.kernel_witness {
            out.push(format!(
                "kernel witness over [{}, {}]: norm {:.3e} -> {:.3e}",
                k.s, k.t, k.norm_at_s, k.norm_at_t
            ));
        }
        for tr in &self.trajectories {
            if let Some(b) = tr.blp {
                out.push(format!("{}: backflow integral {b:.6e}", tr.name));
            }
        }
        out.push(format!("verdict: {:?}", self.verdict));
        out
    }
}

type StepWitness = (WitnessPair, WitnessCertificate, Option<SeparableRecord>);

/// Builds witnesses for the requested steps, verifies them at the step end,
/// and optionally derives separable versions.
fn witness_stage(
    cfg: &ScenarioConfig,
    f: &DynamicalFamily,
    steps: &[(f64, f64)],
    report: &mut RunReport,
) -> Vec<WitnessPair> {
    use rayon::prelude::*;
    let tol = &cfg.tolerances;
    let k = cfg.ancilla();
    let results: Vec<(f64, f64, Result<StepWitness>)> = steps
        .par_iter()
        .map(|&(s, t)| {
            let r = (|| {
                let pair = construct_witness_with_ancilla(f, s, cfg.eta, k, tol)?;
                let cert = verify_witness(f, &pair, t, tol)?;
                let sep = if cfg.pipeline.separable && cert.witnessed {
                    let sp = separable_witness(&pair)?;
                    let c = verify_witness(f, &sp, t, tol)?;
                    Some(SeparableRecord {
                        separability: sp.separable.expect("set by separable_witness"),
                        certificate: c,
                    })
                } else {
                    None
                };
                Ok((pair, cert, sep))
            })();
            (s, t, r)
        })
        .collect();
    let mut pairs = Vec::new();
    for (s, t, r) in results {
        match r {
            Ok((pair, cert, sep)) => {
                pairs.push(pair);
                report.witnesses.push(cert);
                report.separable_witnesses.extend(sep);
            }
            Err(e) => report.witness_errors.push(StepError {
                s,
                t,
                error: e.to_string(),
            }),
        }
    }
    pairs
}

pub fn run_pipeline(cfg: &ScenarioConfig) -> Result<RunReport> {
    cfg.validate()?;
    let f = cfg.family()?;
    f.prewarm(&cfg.grid)?;
    let opts = cfg.scan_options();
    let mut report = RunReport {
        tool: ToolInfo::default(),
        config: cfg.clone(),
        family: f.label().to_string(),
        verdict: Verdict::CpDivisible,
        divisibility: None,
        all_pairs: None,
        witnesses: Vec::new(),
        witness_errors: Vec::new(),
        separable_witnesses: Vec::new(),
        kernel_witness: None,
        trajectories: Vec::new(),
    };

    let mut div = scan_cp_divisibility(&f, &cfg.grid, &opts);
    if !cfg.pipeline.rhp {
        for st in &mut div.steps {
            st.g = None;
        }
    }
    if cfg.pipeline.all_pairs {
        report.all_pairs = Some(scan_all_pairs(&f, &cfg.grid, &opts));
    }

    let mut pairs = Vec::new();
    if cfg.pipeline.witness {
        let steps: Vec<(f64, f64)> = div
            .steps
            .iter()
            .filter(|st| match cfg.pipeline.witness_steps {
                WitnessSteps::NonCp => st.cp == Some(false),
                WitnessSteps::All => st.status == StepStatus::Classified,
            })
            .map(|st| (st.s, st.t))
            .collect();
        pairs = witness_stage(cfg, &f, &steps, &mut report);
    }

    if cfg.pipeline.rank {
        if let Some((s, t)) = div.divisibility_obstruction {
            match kernel_witness(&f, s, t, cfg.eta, &cfg.tolerances) {
                Ok(kw) => report.kernel_witness = Some(KernelWitnessSummary {
                    s: kw.s,
                    t: kw.t,
                    epsilon: kw.epsilon,
                    norm_at_s: kw.norm_at_s,
                    norm_at_t: kw.norm_at_t,
                }),
                Err(e) => report.witness_errors.push(StepError {
                    s,
                    t,
                    error: e.to_string(),
                }),
            }
        }
    }

    if cfg.pipeline.blp {
        if let Some(pair) = pairs.first() {
            let k = cfg.grid.index_of(pair.s).expect("witness anchors lie on the grid");
            if let Ok(tail) = cfg.grid.tail(k) {
                let traj = trajectory(&f, &pair.rho1_initial, &pair.rho2_initial, &tail, Some(pair.ancilla_dim))?;
                let blp = blp_integral(&traj).ok();
                report.trajectories.push(NamedTrajectory {
                    name: "witness".into(),
                    anchor_s: pair.s,
                    ancilla_dim: Some(pair.ancilla_dim),
                    trajectory: traj,
                    blp,
                });
            }
        }
    }

    let non_cp = div.non_cp_steps().next().is_some();
    let witnessed = report.witnesses.iter().any(|c| c.witnessed)
        || report
            .kernel_witness
            .as_ref()
            .is_some_and(|k| k.norm_at_t - k.norm_at_s > cfg.tolerances.gain);
    report.verdict = if witnessed {
        Verdict::BackflowWitnessed
    } else if !non_cp && div.divisibility_obstruction.is_none() {
        Verdict::CpDivisible
    } else if cfg.pipeline.witness {
        Verdict::Inconclusive
    } else {
        Verdict::NotCpDivisible
    };
    if cfg.pipeline.scan {
        report.divisibility = Some(div);
    }
    Ok(report)
}

/// Writes the report and its CSV companions under `dir`.
pub fn write_outputs(report: &RunReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let out = &report.config.output;
    fs::write(dir.join(&out.report), report.to_json()?)?;
    if let Some(div) = &report.divisibility {
        div.write_csv(fs::File::create(dir.join(&out.scan_csv))?)?;
    }
    if let Some(tr) = report.trajectories.first() {
        tr.trajectory.write_csv(fs::File::create(dir.join(&out.trajectory_csv))?)?;
    }
    Ok(())
}
