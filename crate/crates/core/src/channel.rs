//! Linear maps on operators, stored as superoperator matrices.
//!
//! A channel on `C^d` is a `d² × d²` matrix `S` with `vec(Λ(X)) = S vec(X)`
//! under column stacking. Choi matrices use the normalized convention
//! `J = (I ⊗ Λ)(φ⁺)` with `φ⁺ = |Ω⟩⟨Ω|`, `|Ω⟩ = d^{-1/2} Σ |i⟩|i⟩`, input
//! (ancilla) factor first, so a trace-preserving map has `Tr J = 1`.

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::operator::{
    from_pairs, hermitian_basis, pauli_matrices, svd, to_pairs, ComplexMatrix, DensityOperator,
    HermitianOperator, Keep,
};
use crate::{random, Error, Result, C64};

/// Hermiticity-preserving linear map on `d × d` operators.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumChannel {
    dim: usize,
    superop: ComplexMatrix,
}

/// Normalized Choi matrix of a channel, input factor first.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    pub dim_in: usize,
    pub dim_out: usize,
    pub matrix: HermitianOperator,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CpVerdict {
    pub cp: bool,
    pub min_choi_eig: f64,
}

impl QuantumChannel {
    /// Validates shape and Hermiticity preservation (to 1e-10 relative to
    /// the largest superoperator entry).
    pub fn new(dim: usize, superop: ComplexMatrix) -> Result<Self> {
        let n = dim * dim;
        if dim == 0 || superop.rows() != n || superop.cols() != n {
            return Err(Error::Shape(format!(
                "superoperator for dim {dim} must be {n}x{n}, got {}x{}",
                superop.rows(),
                superop.cols()
            )));
        }
        let ch = Self { dim, superop };
        let scale = ch.superop.max_abs().max(1.0);
        for b in hermitian_basis(dim) {
            let img = ch.apply_matrix(b.matrix())?;
            let defect = img.hermiticity_defect();
            if defect > 1e-10 * scale {
                return Err(Error::NotHermitian(defect));
            }
        }
        Ok(ch)
    }

    pub(crate) fn from_superop_unchecked(dim: usize, superop: ComplexMatrix) -> Self {
        debug_assert_eq!(superop.rows(), dim * dim);
        Self { dim, superop }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            superop: ComplexMatrix::identity(dim * dim),
        }
    }

    /// `ρ ↦ Σ K ρ K†`, superoperator `Σ conj(K) ⊗ K`.
    pub fn from_kraus(dim: usize, kraus: &[ComplexMatrix]) -> Result<Self> {
        let mut s = ComplexMatrix::zeros(dim * dim, dim * dim);
        for k in kraus {
            if k.rows() != dim || k.cols() != dim {
                return Err(Error::Shape(format!(
                    "Kraus operator is {}x{}, expected {dim}x{dim}",
                    k.rows(),
                    k.cols()
                )));
            }
            s += &k.conj().kron(k);
        }
        Ok(Self { dim, superop: s })
    }

    pub fn unitary(u: &ComplexMatrix) -> Result<Self> {
        Self::from_kraus(u.rows(), std::slice::from_ref(u))
    }

    /// `X ↦ Xᵀ`: positive but not completely positive.
    pub fn transpose_map(dim: usize) -> Self {
        let n = dim * dim;
        let mut s = ComplexMatrix::zeros(n, n);
        for i in 0..dim {
            for j in 0..dim {
                // vec index of (i, j) is i + j·dim; transpose sends it to (j, i)
                s[(j + i * dim, i + j * dim)] = C64::new(1.0, 0.0);
            }
        }
        Self { dim, superop: s }
    }

    /// `X ↦ Tr(X)·I/d`.
    pub fn completely_depolarizing(dim: usize) -> Self {
        let id = ComplexMatrix::identity(dim).vectorize();
        let out: Vec<C64> = id.iter().map(|z| z / dim as f64).collect();
        Self {
            dim,
            superop: ComplexMatrix::outer(&out, &id),
        }
    }

    /// Qubit map acting on the Bloch vector as `diag(λ1, λ2, λ3)`, trace
    /// preserving and unital.
    pub fn pauli_diagonal(lambda: [f64; 3]) -> Self {
        let paulis = pauli_matrices();
        let mut s = ComplexMatrix::zeros(4, 4);
        let weights = [1.0, lambda[0], lambda[1], lambda[2]];
        for (p, w) in paulis.iter().zip(weights) {
            let v = p.vectorize();
            s += &ComplexMatrix::outer(&v, &v).scale_real(0.5 * w);
        }
        Self { dim: 2, superop: s }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn superop(&self) -> &ComplexMatrix {
        &self.superop
    }

    pub fn apply_matrix(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.dim || x.cols() != self.dim {
            return Err(Error::Shape(format!(
                "channel on dim {} applied to {}x{} operator",
                self.dim,
                x.rows(),
                x.cols()
            )));
        }
        let v = self.superop.matvec(&x.vectorize());
        ComplexMatrix::devectorize(&v, self.dim, self.dim)
    }

    pub fn apply(&self, h: &HermitianOperator) -> Result<HermitianOperator> {
        let out = self.apply_matrix(h.matrix())?;
        HermitianOperator::new(out)
    }

    /// `(I_k ⊗ Λ)(X)` for `X` on `C^k ⊗ C^d`, evaluated block by block.
    pub fn apply_extended(&self, k: usize, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.dim;
        let n = k * d;
        if x.rows() != n || x.cols() != n {
            return Err(Error::Shape(format!(
                "extended channel on {k}x{d} applied to {}x{} operator",
                x.rows(),
                x.cols()
            )));
        }
        let mut out = ComplexMatrix::zeros(n, n);
        for p in 0..k {
            for q in 0..k {
                let block = ComplexMatrix::from_fn(d, d, |a, b| x[(p * d + a, q * d + b)]);
                let img = self.apply_matrix(&block)?;
                for a in 0..d {
                    for b in 0..d {
                        out[(p * d + a, q * d + b)] = img[(a, b)];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn apply_extended_hermitian(&self, k: usize, h: &HermitianOperator) -> Result<HermitianOperator> {
        HermitianOperator::new(self.apply_extended(k, h.matrix())?)
    }

    /// `self ∘ inner`: applies `inner` first.
    pub fn compose(&self, inner: &QuantumChannel) -> Result<QuantumChannel> {
        if self.dim != inner.dim {
            return Err(Error::Shape(format!(
                "cannot compose channels on dims {} and {}",
                self.dim, inner.dim
            )));
        }
        Ok(Self {
            dim: self.dim,
            superop: &self.superop * &inner.superop,
        })
    }

    /// Inverse map together with the superoperator condition number.
    ///
    /// Fails with [`Error::SingularMap`] when `σ_min ≤ n·ε·σ_max` and with
    /// [`Error::IllConditioned`] when `σ_max/σ_min` exceeds `cond_limit`.
    pub fn inverse_with_condition(&self, cond_limit: f64) -> Result<(QuantumChannel, f64)> {
        let sv = svd(&self.superop).values;
        let sigma_max = sv.first().copied().unwrap_or(0.0);
        let sigma_min = sv.last().copied().unwrap_or(0.0);
        let n = self.superop.rows() as f64;
        if sigma_max == 0.0 || sigma_min <= n * f64::EPSILON * sigma_max {
            return Err(Error::SingularMap {
                sigma_min,
                sigma_max,
            });
        }
        let cond = sigma_max / sigma_min;
        if cond > cond_limit {
            return Err(Error::IllConditioned {
                cond,
                limit: cond_limit,
            });
        }
        let inv = self.superop.inverse().ok_or(Error::SingularMap {
            sigma_min,
            sigma_max,
        })?;
        Ok((Self::from_superop_unchecked(self.dim, inv), cond))
    }

    pub fn inverse(&self, cond_limit: f64) -> Result<QuantumChannel> {
        self.inverse_with_condition(cond_limit).map(|(c, _)| c)
    }

    /// `I_k ⊗ Λ` on `C^k ⊗ C^d`, ancilla factor first.
    pub fn extend_with_identity(&self, k: usize) -> QuantumChannel {
        let d = self.dim;
        let big = k * d;
        let n = big * big;
        let mut s = ComplexMatrix::zeros(n, n);
        for p in 0..k {
            for q in 0..k {
                for a in 0..d {
                    for b in 0..d {
                        let row = (p * d + a) + (q * d + b) * big;
                        for a2 in 0..d {
                            for b2 in 0..d {
                                let col = (p * d + a2) + (q * d + b2) * big;
                                s[(row, col)] = self.superop[(a + b * d, a2 + b2 * d)];
                            }
                        }
                    }
                }
            }
        }
        Self { dim: big, superop: s }
    }

    /// Normalized Choi matrix; Hermitian up to round-off, which is
    /// symmetrized away.
    pub fn to_choi(&self) -> ChoiMatrix {
        let d = self.dim;
        let inv_d = 1.0 / d as f64;
        let j = ComplexMatrix::from_fn(d * d, d * d, |r, c| {
            let (i, a) = (r / d, r % d);
            let (jj, b) = (c / d, c % d);
            self.superop[(a + b * d, i + jj * d)] * inv_d
        });
        let matrix = HermitianOperator::with_tolerance(j, f64::INFINITY).expect("square");
        ChoiMatrix {
            dim_in: d,
            dim_out: d,
            matrix,
        }
    }

    pub fn from_choi(choi: &ChoiMatrix) -> Result<QuantumChannel> {
        let d = choi.dim_in;
        if choi.dim_out != d || choi.matrix.dim() != d * d {
            return Err(Error::Shape("only square Choi matrices are supported".into()));
        }
        let j = choi.matrix.matrix();
        let s = ComplexMatrix::from_fn(d * d, d * d, |row, col| {
            let (a, b) = (row % d, row / d);
            let (i, jj) = (col % d, col / d);
            j[(i * d + a, jj * d + b)] * d as f64
        });
        Ok(Self::from_superop_unchecked(d, s))
    }

    pub fn is_cp(&self, tol: f64) -> CpVerdict {
        let min = self.to_choi().matrix.min_eigenvalue();
        CpVerdict {
            cp: min >= -tol,
            min_choi_eig: min,
        }
    }

    /// Reduced Choi matrix over the output equals `I/d` within `tol`.
    pub fn is_tp(&self, tol: f64) -> bool {
        self.tp_defect() <= tol
    }

    /// Largest entry of `Tr_out J − I/d`.
    pub fn tp_defect(&self) -> f64 {
        let d = self.dim;
        let reduced = self
            .to_choi()
            .matrix
            .matrix()
            .partial_trace(d, d, Keep::A)
            .expect("Choi is d²×d²");
        reduced.max_abs_diff(&ComplexMatrix::identity(d).scale_real(1.0 / d as f64))
    }

    /// Heuristic positivity check: maps `n_samples` Haar-random pure states
    /// and reports `false` on the first image with an eigenvalue below
    /// `-tol`. A `true` result is not a proof of positivity.
    pub fn is_positive_sampled<R: Rng + ?Sized>(&self, n_samples: usize, tol: f64, rng: &mut R) -> bool {
        (0..n_samples).all(|_| {
            let psi = random::pure_state(rng, self.dim);
            let img = self
                .apply_matrix(psi.matrix())
                .expect("dimensions agree by construction");
            HermitianOperator::with_tolerance(img, f64::INFINITY)
                .expect("square")
                .min_eigenvalue()
                >= -tol
        })
    }

    /// Pauli transfer matrix `R_ij = ½ Tr(σ_i Λ(σ_j))`; qubits only.
    pub fn pauli_transfer_matrix(&self) -> Option<[[f64; 4]; 4]> {
        if self.dim != 2 {
            return None;
        }
        let p = pauli_matrices();
        let mut r = [[0.0; 4]; 4];
        for j in 0..4 {
            let img = self.apply_matrix(&p[j]).expect("qubit operator");
            for i in 0..4 {
                r[i][j] = 0.5 * (&p[i] * &img).trace().re;
            }
        }
        Some(r)
    }

    /// Bloch-axis eigenvalues when the map is Pauli-diagonal (trace
    /// preserving, unital, diagonal transfer matrix within `tol`).
    pub fn pauli_eigenvalues(&self, tol: f64) -> Option<[f64; 3]> {
        let r = self.pauli_transfer_matrix()?;
        for (i, row) in r.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if i != j && v.abs() > tol {
                    return None;
                }
            }
        }
        if (r[0][0] - 1.0).abs() > tol {
            return None;
        }
        Some([r[1][1], r[2][2], r[3][3]])
    }

    /// Maps `|i⟩⟨j|` for all basis pairs and compares; for tests and
    /// invariants.
    pub fn max_abs_diff(&self, other: &QuantumChannel) -> f64 {
        self.superop.max_abs_diff(&other.superop)
    }
}

/// Exact positivity of a unital qubit map with Bloch-axis eigenvalues
/// `λ`: the Bloch ball maps into itself iff every `|λ_i| ≤ 1`.
pub fn pauli_positivity(lambda: [f64; 3], tol: f64) -> bool {
    lambda.iter().all(|l| l.abs() <= 1.0 + tol)
}

/// Normalized maximally entangled projector on `C^d ⊗ C^d`.
pub fn maximally_entangled(d: usize) -> DensityOperator {
    let mut v = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        v[i * d + i] = C64::new(1.0, 0.0);
    }
    DensityOperator::pure(&v).expect("non-zero vector")
}

#[derive(Serialize, Deserialize)]
struct ChannelRepr {
    dim: usize,
    superop: Vec<[f64; 2]>,
}

impl Serialize for QuantumChannel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ChannelRepr {
            dim: self.dim,
            superop: to_pairs(self.superop.data()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QuantumChannel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = ChannelRepr::deserialize(deserializer)?;
        let n = repr.dim * repr.dim;
        let m = ComplexMatrix::from_vec(n, n, from_pairs(&repr.superop)).map_err(serde::de::Error::custom)?;
        QuantumChannel::new(repr.dim, m).map_err(serde::de::Error::custom)
    }
}
