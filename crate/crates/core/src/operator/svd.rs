//! One-sided (Hestenes) Jacobi singular value decomposition.
//!
//! Columns are orthogonalized pairwise; small singular values keep high
//! relative accuracy, which the rank and conditioning checks depend on.

use super::ComplexMatrix;
use crate::C64;

const MAX_SWEEPS: usize = 80;

/// Singular values (descending) with the matching right singular vectors as
/// columns of `right`.
#[derive(Clone, Debug)]
pub struct SingularDecomposition {
    pub values: Vec<f64>,
    pub right: ComplexMatrix,
}

impl SingularDecomposition {
    pub fn condition_number(&self) -> f64 {
        match (self.values.first(), self.values.last()) {
            (Some(&max), Some(&min)) if min > 0.0 => max / min,
            _ => f64::INFINITY,
        }
    }

    /// Number of singular values above `rel_tol · σ_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let max = self.values.first().copied().unwrap_or(0.0);
        if max == 0.0 {
            return 0;
        }
        self.values.iter().filter(|&&s| s > rel_tol * max).count()
    }
}

pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    svd(m).values
}

pub fn svd(m: &ComplexMatrix) -> SingularDecomposition {
    let rows = m.rows();
    let cols = m.cols();
    let mut u = m.clone();
    let mut v = ComplexMatrix::identity(cols);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..cols {
            for j in (i + 1)..cols {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = C64::new(0.0, 0.0);
                for k in 0..rows {
                    let ui = u[(k, i)];
                    let uj = u[(k, j)];
                    alpha += ui.norm_sqr();
                    beta += uj.norm_sqr();
                    gamma += ui.conj() * uj;
                }
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let cphase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..rows {
                    let ui = u[(k, i)];
                    let uj = u[(k, j)] * cphase;
                    u[(k, i)] = ui * c - uj * s;
                    u[(k, j)] = ui * s + uj * c;
                }
                for k in 0..cols {
                    let vi = v[(k, i)];
                    let vj = v[(k, j)] * cphase;
                    v[(k, i)] = vi * c - vj * s;
                    v[(k, j)] = vi * s + vj * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..cols)
        .map(|j| (0..rows).map(|k| u[(k, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let values: Vec<f64> = order.iter().take(rows.min(cols)).map(|&j| norms[j]).collect();
    let right = ComplexMatrix::from_fn(cols, cols, |r, c| v[(r, order[c])]);
    SingularDecomposition { values, right }
}
