//! Seeded random matrices, states and channels.
//!
//! Used by the sampled positivity heuristic and by the test suites. All
//! generators take an explicit RNG so runs are reproducible from a seed.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::QuantumChannel;
use crate::operator::{ComplexMatrix, DensityOperator, HermitianOperator};
use crate::C64;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Matrix of i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermitianOperator {
    let g = ginibre(rng, n, n);
    HermitianOperator::new((&g + &g.adjoint()).scale_real(0.5)).expect("Hermitian by construction")
}

/// Haar-random unit vector.
pub fn pure_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

pub fn pure_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DensityOperator {
    DensityOperator::pure(&pure_vector(rng, n)).expect("non-zero vector")
}

/// Hilbert-Schmidt random density operator `G G† / Tr(G G†)`.
pub fn density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DensityOperator {
    let g = ginibre(rng, n, n);
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    DensityOperator::new(w.scale_real(1.0 / tr)).expect("PSD with unit trace")
}

/// Haar-random unitary via Gram-Schmidt on Gaussian columns.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    isometry(rng, n, n)
}

/// Random `rows × cols` isometry (`cols ≤ rows`), orthonormal columns.
pub fn isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    assert!(cols <= rows);
    let g = ginibre(rng, rows, cols);
    let mut q: Vec<Vec<C64>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v = g.column(j);
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for u in &q {
                let ip: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= ip * y;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        q.push(v.into_iter().map(|z| z / norm).collect());
    }
    ComplexMatrix::from_fn(rows, cols, |i, j| q[j][i])
}

/// Random Kraus set `{K_i}` with `Σ K_i† K_i = I`, obtained by slicing a
/// random Stinespring isometry.
pub fn kraus_set<R: Rng + ?Sized>(rng: &mut R, dim: usize, n_kraus: usize) -> Vec<ComplexMatrix> {
    let v = isometry(rng, dim * n_kraus, dim);
    (0..n_kraus)
        .map(|k| ComplexMatrix::from_fn(dim, dim, |i, j| v[(k * dim + i, j)]))
        .collect()
}

pub fn cptp_channel<R: Rng + ?Sized>(rng: &mut R, dim: usize, n_kraus: usize) -> QuantumChannel {
    QuantumChannel::from_kraus(dim, &kraus_set(rng, dim, n_kraus)).expect("valid Kraus set")
}
