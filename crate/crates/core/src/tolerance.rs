use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by every analysis stage.
///
/// All fields have defaults, so a scenario file may override any subset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Maximum `|h - h†|` entry accepted (and symmetrized away) when
    /// building a Hermitian operator.
    pub hermitian: f64,
    /// Allowed deviation of a density operator's trace from one.
    pub trace: f64,
    /// Most negative eigenvalue still accepted as positive semidefinite.
    pub psd: f64,
    /// CP verdict threshold on the normalized Choi minimum eigenvalue.
    pub cp: f64,
    /// Trace-preservation threshold on the reduced Choi matrix.
    pub tp: f64,
    /// Relative singular value cutoff used for numerical rank.
    pub rank: f64,
    /// Largest superoperator condition number accepted for inversion.
    pub cond_limit: f64,
    /// Distinguishability gain above which backflow counts as witnessed.
    pub gain: f64,
    /// Haar samples used by the sampled positivity heuristic.
    pub positivity_samples: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-9,
            trace: 1e-12,
            psd: 1e-10,
            cp: 1e-9,
            tp: 1e-9,
            rank: 1e-10,
            cond_limit: 1e8,
            gain: 1e-9,
            positivity_samples: 2000,
        }
    }
}
