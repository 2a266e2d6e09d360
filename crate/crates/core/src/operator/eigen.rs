//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Each rotation strips the phase of the pivot `a_pq` and then applies the
//! real symmetric Jacobi rotation, so the iteration stays in the unitary
//! group and the eigenvector matrix is accumulated directly.

use super::{ComplexMatrix, HermitianOperator};
use crate::C64;

const MAX_SWEEPS: usize = 100;

/// Ascending eigenvalues and the matching orthonormal eigenvectors
/// (stored as columns).
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }
}

pub fn hermitian_eig(h: &HermitianOperator) -> EigenDecomposition {
    jacobi(h.matrix())
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(h: &HermitianOperator) -> Vec<f64> {
    jacobi(h.matrix()).values
}

pub(crate) fn jacobi(input: &ComplexMatrix) -> EigenDecomposition {
    let n = input.rows();
    let mut a = input.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return EigenDecomposition {
            values: vec![0.0; n],
            vectors: v,
        };
    }
    let threshold = f64::EPSILON * scale;

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    EigenDecomposition { values, vectors }
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let n = a.rows();
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 || mag < f64::MIN_POSITIVE {
        return;
    }
    let phase = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let cphase = phase.conj();

    // a <- a G, with G = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on (p, q)
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * cphase * s;
        a[(k, q)] = akp * s + akq * cphase * c;
    }
    // a <- G† a
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * phase * s;
        a[(q, k)] = apk * s + aqk * phase * c;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * cphase * s;
        v[(k, q)] = vkp * s + vkq * cphase * c;
    }
}
