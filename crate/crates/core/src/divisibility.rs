//! Intermediate maps `V_{t,s} = Λ_t Λ_s⁻¹` and CP-divisibility scans.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{pauli_positivity, QuantumChannel};
use crate::dynamics::{superop_rank, DynamicalFamily, TimeGrid};
use crate::operator::{svd, ComplexMatrix, HermitianOperator};
use crate::{Error, Result, Tolerances, C64};

/// `V_{t,s}` together with the condition number of the inverted `Λ_s`.
#[derive(Clone, Debug)]
pub struct IntermediateMap {
    pub s: f64,
    pub t: f64,
    pub channel: QuantumChannel,
    pub condition_number: f64,
}

pub fn intermediate_map(f: &DynamicalFamily, s: f64, t: f64, cond_limit: f64) -> Result<IntermediateMap> {
    if !(s <= t) {
        return Err(Error::Domain(format!("intermediate map needs s <= t (got s={s}, t={t})")));
    }
    if s == t {
        return Ok(IntermediateMap {
            s,
            t,
            channel: QuantumChannel::identity(f.dim()),
            condition_number: 1.0,
        });
    }
    let ls = f.evaluate(s)?;
    let lt = f.evaluate(t)?;
    let (inv, cond) = ls.inverse_with_condition(cond_limit)?;
    Ok(IntermediateMap {
        s,
        t,
        channel: lt.compose(&inv)?,
        condition_number: cond,
    })
}

/// Trace norm of the normalized Choi matrix minus one; zero for CPTP maps.
pub fn choi_excess(v: &QuantumChannel) -> f64 {
    v.to_choi().matrix.trace_norm() - 1.0
}

/// `g(t) = (‖Choi(V_{t+ε,t})‖₁ − 1)/ε`.
pub fn rhp_indicator(f: &DynamicalFamily, t: f64, eps: f64, cond_limit: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("rhp step {eps} must be positive")));
    }
    let v = intermediate_map(f, t, t + eps, cond_limit)?;
    Ok(choi_excess(&v.channel) / eps)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepStatus {
    Classified,
    /// `Λ_s` invertible but beyond the condition-number limit.
    NearSingular,
    Singular,
    Error,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositivityMethod {
    /// CP verdict, or the Bloch-ball test for Pauli-diagonal qubit maps.
    Exact,
    Sampled,
    Skipped,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityVerdict {
    pub method: PositivityMethod,
    pub positive: Option<bool>,
}

/// Classification of one consecutive step `(s, t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub s: f64,
    pub t: f64,
    pub status: StepStatus,
    pub min_choi_eig: Option<f64>,
    pub cp: Option<bool>,
    pub positivity: PositivityVerdict,
    /// Superoperator rank of `Λ_s`.
    pub rank: usize,
    pub condition_number: Option<f64>,
    /// Finite-step RHP indicator `(‖Choi V‖₁ − 1)/(t − s)`.
    pub g: Option<f64>,
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisibilityReport {
    pub grid: TimeGrid,
    pub cp_tol: f64,
    pub rank_tol: f64,
    pub cond_limit: f64,
    pub steps: Vec<StepRecord>,
    /// Rank of `Λ_t` at every grid point.
    pub rank_profile: Vec<usize>,
    /// Maximal runs of consecutive non-CP steps, as `(s_first, t_last)`.
    pub non_cp_intervals: Vec<(f64, f64)>,
    /// First step over which the superoperator rank increases.
    pub divisibility_obstruction: Option<(f64, f64)>,
}

impl DivisibilityReport {
    pub fn all_cp(&self) -> bool {
        self.steps.iter().all(|s| s.cp == Some(true))
    }

    /// Steps that were classified non-CP.
    pub fn non_cp_steps(&self) -> impl Iterator<Item = &StepRecord> {
        self.steps.iter().filter(|s| s.cp == Some(false))
    }

    /// Flat CSV with columns `t, min_choi_eig, cp, rank, g`, one row per step
    /// keyed by its start time.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "min_choi_eig", "cp", "rank", "g"])?;
        for st in &self.steps {
            let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
            out.write_record([
                format!("{}", st.s),
                opt(st.min_choi_eig),
                st.cp.map(|c| c.to_string()).unwrap_or_default(),
                st.rank.to_string(),
                opt(st.g),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Settings for [`scan_cp_divisibility`].
#[derive(Clone, Copy, Debug)]
pub struct ScanOptions {
    pub cp_tol: f64,
    pub rank_tol: f64,
    pub cond_limit: f64,
    /// Haar samples for the positivity heuristic on non-Pauli maps; zero
    /// skips it.
    pub positivity_samples: usize,
    pub seed: u64,
}

impl ScanOptions {
    pub fn new(tol: &Tolerances, seed: u64) -> Self {
        Self {
            cp_tol: tol.cp,
            rank_tol: tol.rank,
            cond_limit: tol.cond_limit,
            positivity_samples: tol.positivity_samples,
            seed,
        }
    }
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self::new(&Tolerances::default(), 0)
    }
}

fn positivity_of(v: &QuantumChannel, cp: bool, opts: &ScanOptions, index: usize) -> PositivityVerdict {
    if cp {
        return PositivityVerdict {
            method: PositivityMethod::Exact,
            positive: Some(true),
        };
    }
    if let Some(lambda) = v.pauli_eigenvalues(1e-9) {
        return PositivityVerdict {
            method: PositivityMethod::Exact,
            positive: Some(pauli_positivity(lambda, 1e-9)),
        };
    }
    if opts.positivity_samples == 0 {
        return PositivityVerdict {
            method: PositivityMethod::Skipped,
            positive: None,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(index as u64));
    PositivityVerdict {
        method: PositivityMethod::Sampled,
        positive: Some(v.is_positive_sampled(opts.positivity_samples, 1e-9, &mut rng)),
    }
}

fn classify_step(
    f: &DynamicalFamily,
    index: usize,
    s: f64,
    t: f64,
    rank: usize,
    opts: &ScanOptions,
) -> StepRecord {
    let mut rec = StepRecord {
        s,
        t,
        status: StepStatus::Classified,
        min_choi_eig: None,
        cp: None,
        positivity: PositivityVerdict {
            method: PositivityMethod::Skipped,
            positive: None,
        },
        rank,
        condition_number: None,
        g: None,
        message: None,
    };
    match intermediate_map(f, s, t, opts.cond_limit) {
        Ok(v) => {
            let choi = v.channel.to_choi();
            let min = choi.matrix.min_eigenvalue();
            let cp = min >= -opts.cp_tol;
            rec.min_choi_eig = Some(min);
            rec.cp = Some(cp);
            rec.condition_number = Some(v.condition_number);
            rec.g = Some((choi.matrix.trace_norm() - 1.0) / (t - s));
            rec.positivity = positivity_of(&v.channel, cp, opts, index);
        }
        Err(e) => {
            rec.status = match e {
                Error::SingularMap { .. } => StepStatus::Singular,
                Error::IllConditioned { cond, .. } => {
                    rec.condition_number = Some(cond);
                    StepStatus::NearSingular
                }
                _ => StepStatus::Error,
            };
            rec.message = Some(e.to_string());
        }
    }
    rec
}

fn maximal_runs(steps: &[StepRecord]) -> Vec<(f64, f64)> {
    let mut runs = Vec::new();
    let mut start: Option<f64> = None;
    let mut last_t = 0.0;
    for st in steps {
        if st.cp == Some(false) {
            start.get_or_insert(st.s);
            last_t = st.t;
        } else if let Some(s0) = start.take() {
            runs.push((s0, last_t));
        }
    }
    if let Some(s0) = start {
        runs.push((s0, last_t));
    }
    runs
}

fn ranks_on(f: &DynamicalFamily, grid: &TimeGrid, tol: f64) -> Vec<usize> {
    grid.points()
        .par_iter()
        .map(|&t| f.evaluate(t).map(|ch| superop_rank(ch.superop(), tol)).unwrap_or(0))
        .collect()
}

/// Classifies every consecutive grid step. Channels are evaluated in grid
/// order first; the per-step work then runs in parallel and is collected in
/// step order, so the report does not depend on the thread count.
pub fn scan_cp_divisibility(f: &DynamicalFamily, grid: &TimeGrid, opts: &ScanOptions) -> DivisibilityReport {
    // failures are reported per step below
    let _ = f.prewarm(grid);
    let rank_profile = ranks_on(f, grid, opts.rank_tol);
    let steps: Vec<StepRecord> = grid
        .steps()
        .into_par_iter()
        .enumerate()
        .map(|(k, (s, t))| classify_step(f, k, s, t, rank_profile[k], opts))
        .collect();
    let divisibility_obstruction = rank_profile
        .windows(2)
        .position(|w| w[1] > w[0])
        .map(|k| (grid.point(k), grid.point(k + 1)));
    DivisibilityReport {
        grid: *grid,
        cp_tol: opts.cp_tol,
        rank_tol: opts.rank_tol,
        cond_limit: opts.cond_limit,
        non_cp_intervals: maximal_runs(&steps),
        steps,
        rank_profile,
        divisibility_obstruction,
    }
}

/// CP verdict for one `(s, t)` pair of the all-pairs diagnostic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub s: f64,
    pub t: f64,
    pub status: StepStatus,
    pub min_choi_eig: Option<f64>,
    pub cp: Option<bool>,
}

/// Every pair `s < t` of grid points; quadratic in the grid size.
pub fn scan_all_pairs(f: &DynamicalFamily, grid: &TimeGrid, opts: &ScanOptions) -> Vec<PairRecord> {
    let _ = f.prewarm(grid);
    let pts = grid.points();
    let pairs: Vec<(f64, f64)> = (0..pts.len())
        .flat_map(|i| ((i + 1)..pts.len()).map(move |j| (i, j)))
        .map(|(i, j)| (pts[i], pts[j]))
        .collect();
    pairs
        .into_par_iter()
        .map(|(s, t)| {
            let rec = classify_step(f, 0, s, t, 0, &ScanOptions { positivity_samples: 0, ..*opts });
            PairRecord {
                s,
                t,
                status: rec.status,
                min_choi_eig: rec.min_choi_eig,
                cp: rec.cp,
            }
        })
        .collect()
}

/// Hermitian, traceless, Frobenius-orthonormal basis of the kernel of `Λ_s`
/// (singular values at most `tol·σ_max`). Empty when `Λ_s` is bijective.
pub fn kernel_basis(f: &DynamicalFamily, s: f64, tol: f64) -> Result<Vec<HermitianOperator>> {
    let ch = f.evaluate(s)?;
    let d = ch.dim();
    let dec = svd(ch.superop());
    let smax = dec.values.first().copied().unwrap_or(0.0);
    let null: Vec<usize> = (0..dec.values.len())
        .filter(|&k| dec.values[k] <= tol * smax)
        .collect();
    if null.is_empty() {
        return Ok(Vec::new());
    }
    let mut candidates = Vec::with_capacity(2 * null.len());
    for &k in &null {
        let x = ComplexMatrix::devectorize(&dec.right.column(k), d, d)?;
        let xd = x.adjoint();
        candidates.push((&x + &xd).scale_real(0.5));
        candidates.push((&x - &xd).scale(C64::new(0.0, -0.5)));
    }
    let mut basis: Vec<ComplexMatrix> = Vec::with_capacity(null.len());
    for mut c in candidates {
        for _ in 0..2 {
            for b in &basis {
                let ip = b.inner_re(&c);
                c = &c - &b.scale_real(ip);
            }
        }
        let n = c.frobenius_norm();
        if n > 1e-6 {
            basis.push(c.scale_real(1.0 / n));
        }
        if basis.len() == null.len() {
            break;
        }
    }
    basis
        .into_iter()
        .map(|m| HermitianOperator::with_tolerance(m, 1e-8))
        .collect()
}
