use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::eigen::{jacobi, EigenDecomposition};
use super::ComplexMatrix;
use crate::{Error, Result, Tolerances, C64};

/// Square matrix equal to its conjugate transpose.
///
/// Construction symmetrizes `(h + h†)/2` when the defect is within the
/// Hermiticity tolerance (relative to the largest entry) and rejects the
/// input otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(m, Tolerances::default().hermitian)
    }

    pub fn with_tolerance(m: ComplexMatrix, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape(format!(
                "Hermitian operator must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let defect = m.hermiticity_defect();
        if defect > tol * m.max_abs().max(1.0) {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self {
            matrix: symmetrize(&m),
        })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn eig(&self) -> EigenDecomposition {
        jacobi(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eig().values
    }

    /// Sum of absolute eigenvalues.
    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|l| l.abs()).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// `a·self + b·other`; stays Hermitian for real coefficients.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self {
            matrix: &self.matrix.scale_real(a) + &other.matrix.scale_real(b),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            matrix: self.matrix.scale_real(factor),
        }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            matrix: self.matrix.kron(&other.matrix),
        }
    }

    /// Hilbert-Schmidt norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.frobenius_norm()
    }
}

impl std::ops::Sub for &HermitianOperator {
    type Output = HermitianOperator;

    fn sub(self, rhs: &HermitianOperator) -> HermitianOperator {
        self.combine(1.0, rhs, -1.0)
    }
}

impl std::ops::Add for &HermitianOperator {
    type Output = HermitianOperator;

    fn add(self, rhs: &HermitianOperator) -> HermitianOperator {
        self.combine(1.0, rhs, 1.0)
    }
}

pub(crate) fn symmetrize(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.rows();
    ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(m[(i, i)].re, 0.0)
        } else {
            (m[(i, j)] + m[(j, i)].conj()) * 0.5
        }
    })
}

/// Positive semidefinite Hermitian operator with unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    inner: HermitianOperator,
}

impl DensityOperator {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::from_hermitian(HermitianOperator::new(m)?)
    }

    pub fn from_hermitian(h: HermitianOperator) -> Result<Self> {
        Self::from_hermitian_with(h, &Tolerances::default())
    }

    pub fn from_hermitian_with(h: HermitianOperator, tol: &Tolerances) -> Result<Self> {
        let tr = h.trace();
        if (tr - 1.0).abs() > tol.trace {
            return Err(Error::NotDensity(format!("trace {tr}")));
        }
        let min = h.min_eigenvalue();
        if min < -tol.psd {
            return Err(Error::NotDensity(format!("minimum eigenvalue {min:e}")));
        }
        Ok(Self { inner: h })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            inner: HermitianOperator::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// Projector onto a (not necessarily normalized) vector.
    pub fn pure(v: &[C64]) -> Result<Self> {
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::NotDensity("zero vector".into()));
        }
        let u: Vec<C64> = v.iter().map(|z| z / norm).collect();
        Ok(Self {
            inner: HermitianOperator {
                matrix: ComplexMatrix::outer(&u, &u),
            },
        })
    }

    /// Computational basis projector `|k⟩⟨k|`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(k, k)] = C64::new(1.0, 0.0);
        Self {
            inner: HermitianOperator { matrix: m },
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn as_hermitian(&self) -> &HermitianOperator {
        &self.inner
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.inner.matrix()
    }

    pub fn into_hermitian(self) -> HermitianOperator {
        self.inner
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            inner: self.inner.tensor(&other.inner),
        }
    }

    /// Convex combination `(1 - w)·self + w·other`.
    pub fn mix(&self, other: &Self, w: f64) -> Self {
        Self {
            inner: self.inner.combine(1.0 - w, &other.inner, w),
        }
    }
}

impl Serialize for HermitianOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.matrix.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HermitianOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let m = ComplexMatrix::deserialize(deserializer)?;
        HermitianOperator::new(m).map_err(serde::de::Error::custom)
    }
}

impl Serialize for DensityOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.inner.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let h = HermitianOperator::deserialize(deserializer)?;
        DensityOperator::from_hermitian(h).map_err(serde::de::Error::custom)
    }
}
