//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are small (superoperators of a qubit extended by a qutrit
//! ancilla are 36×36), so everything is dense and allocation-happy.
//! Vectorization is column-stacking everywhere, which makes the superoperator
//! of `X ↦ A X B` equal to `Bᵀ ⊗ A`.

mod eigen;
mod hermitian;
mod matrix;
mod svd;

pub use eigen::{hermitian_eig, hermitian_eigenvalues, EigenDecomposition};
pub use hermitian::{DensityOperator, HermitianOperator};
pub use matrix::{ComplexMatrix, Keep};
pub use svd::{singular_values, svd, SingularDecomposition};

pub(crate) use matrix::{from_pairs, to_pairs};

use crate::{Result, C64};

pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

pub fn partial_trace(m: &ComplexMatrix, dim_a: usize, dim_b: usize, keep: Keep) -> Result<ComplexMatrix> {
    m.partial_trace(dim_a, dim_b, keep)
}

pub fn trace_norm(h: &HermitianOperator) -> f64 {
    h.trace_norm()
}

pub fn min_eigenvalue(h: &HermitianOperator) -> f64 {
    h.min_eigenvalue()
}

pub fn is_psd(h: &HermitianOperator, tol: f64) -> bool {
    h.is_psd(tol)
}

pub fn vectorize(m: &ComplexMatrix) -> Vec<C64> {
    m.vectorize()
}

pub fn devectorize(v: &[C64], rows: usize, cols: usize) -> Result<ComplexMatrix> {
    ComplexMatrix::devectorize(v, rows, cols)
}

/// Pauli matrices `[I, X, Y, Z]`.
pub fn pauli_matrices() -> [ComplexMatrix; 4] {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    [
        ComplexMatrix::identity(2),
        ComplexMatrix::from_vec(2, 2, vec![z, o, o, z]).unwrap(),
        ComplexMatrix::from_vec(2, 2, vec![z, -i, i, z]).unwrap(),
        ComplexMatrix::from_vec(2, 2, vec![o, z, z, -o]).unwrap(),
    ]
}

/// Orthonormal (Hilbert-Schmidt) basis of Hermitian `d×d` matrices.
pub fn hermitian_basis(d: usize) -> Vec<HermitianOperator> {
    let mut out = Vec::with_capacity(d * d);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        for j in 0..d {
            let mut m = ComplexMatrix::zeros(d, d);
            if i == j {
                m[(i, i)] = C64::new(1.0, 0.0);
            } else if i < j {
                m[(i, j)] = C64::new(s, 0.0);
                m[(j, i)] = C64::new(s, 0.0);
            } else {
                m[(i, j)] = C64::new(0.0, s);
                m[(j, i)] = C64::new(0.0, -s);
            }
            out.push(HermitianOperator::new(m).expect("Hermitian by construction"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn embedded_maximally_entangled_minus_flag() {
        // normalized φ⁺ on the first two ancilla levels of C³ ⊗ C², minus |2⟩⟨2| ⊗ I/2
        let d = 2;
        let mut v = vec![C64::new(0.0, 0.0); 6];
        for i in 0..d {
            v[i * d + i] = C64::new(1.0 / (d as f64).sqrt(), 0.0);
        }
        let phi = ComplexMatrix::outer(&v, &v);
        let flag = DensityOperator::basis(3, 2).tensor(&DensityOperator::maximally_mixed(2));
        let diff = HermitianOperator::new(&phi - flag.matrix()).unwrap();
        assert!((trace_norm(&diff) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn trace_norm_matches_nuclear_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for n in [2usize, 5, 9] {
            let h = random::hermitian(&mut rng, n);
            let nuclear: f64 = singular_values(h.matrix()).iter().sum();
            assert!((trace_norm(&h) - nuclear).abs() < 1e-10);
        }
    }

    #[test]
    fn hermitian_basis_is_orthonormal() {
        let b = hermitian_basis(3);
        assert_eq!(b.len(), 9);
        for (i, x) in b.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                let ip = x.matrix().inner_re(y.matrix());
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn tensor_bilinear() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a1 = random::ginibre(&mut rng, 2, 2);
        let a2 = random::ginibre(&mut rng, 2, 2);
        let b = random::ginibre(&mut rng, 3, 3);
        let lhs = tensor(&(&a1.scale_real(2.0) + &a2), &b);
        let rhs = &tensor(&a1, &b).scale_real(2.0) + &tensor(&a2, &b);
        assert!(lhs.max_abs_diff(&rhs) < 1e-13);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn trace_norm_unitarily_invariant(seed in any::<u64>(), n in 2usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random::hermitian(&mut rng, n);
            let u = random::unitary(&mut rng, n);
            let rotated = HermitianOperator::new(&(&u * h.matrix()) * &u.adjoint()).unwrap();
            prop_assert!((trace_norm(&rotated) - trace_norm(&h)).abs() < 1e-10);
        }

        #[test]
        fn trace_norm_triangle(seed in any::<u64>(), n in 2usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random::hermitian(&mut rng, n);
            let b = random::hermitian(&mut rng, n);
            prop_assert!(trace_norm(&(&a + &b)) <= trace_norm(&a) + trace_norm(&b) + 1e-12);
        }

        #[test]
        fn orthogonal_supports_add_traces(seed in any::<u64>(), n in 1usize..4, m in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // PSD blocks on complementary coordinate subspaces, then a common rotation
            let ga = random::ginibre(&mut rng, n, n);
            let gb = random::ginibre(&mut rng, m, m);
            let a_blk = &ga * &ga.adjoint();
            let b_blk = &gb * &gb.adjoint();
            let dim = n + m;
            let a = ComplexMatrix::from_fn(dim, dim, |i, j| if i < n && j < n { a_blk[(i, j)] } else { C64::new(0.0, 0.0) });
            let b = ComplexMatrix::from_fn(dim, dim, |i, j| if i >= n && j >= n { b_blk[(i - n, j - n)] } else { C64::new(0.0, 0.0) });
            let u = random::unitary(&mut rng, dim);
            let rot = |x: &ComplexMatrix| &(&u * x) * &u.adjoint();
            let diff = HermitianOperator::new(&rot(&a) - &rot(&b)).unwrap();
            let expected = a.trace().re + b.trace().re;
            prop_assert!((trace_norm(&diff) - expected).abs() < 1e-10 * expected.max(1.0));
        }

        #[test]
        fn partial_trace_preserves_trace(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random::ginibre(&mut rng, da * db, da * db);
            for keep in [Keep::A, Keep::B] {
                let r = partial_trace(&m, da, db, keep).unwrap();
                prop_assert!((r.trace() - m.trace()).norm() < 1e-12);
            }
        }
    }
}
