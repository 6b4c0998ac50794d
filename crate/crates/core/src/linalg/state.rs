use serde::{Deserialize, Serialize};

use super::{Complex64, ComplexMatrix, ONE, ZERO};
use crate::error::{Error, Result};
use crate::tolerances::TOL;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![ZERO; dim])
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.amplitudes[index] = ONE;
        v
    }

    /// Normalized superposition `Σ c_k |i_k⟩`.
    pub fn superposition(dim: usize, terms: &[(usize, Complex64)]) -> Result<Self> {
        let mut v = Self::zeros(dim);
        for &(i, c) in terms {
            if i >= dim {
                return Err(Error::OutOfRange(format!("basis index {i} in dimension {dim}")));
            }
            v.amplitudes[i] += c;
        }
        v.normalized()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::Invalid("cannot normalize the zero vector".into()));
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= TOL.state_norm
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.amplitudes.iter().map(|&a| a * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a - b).collect())
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Self {
        Self::new(
            self.amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        )
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap_probability(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// `|self_i|²`.
    pub fn population(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

/// A density operator. Construction checks Hermiticity and unit trace; the
/// propagators keep the matrix Hermitian by symmetrizing after each step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn from_pure(state: &StateVector) -> Self {
        Self {
            matrix: ComplexMatrix::projector(state),
        }
    }

    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension("density matrix must be square".into()));
        }
        let dev = matrix.hermitian_deviation();
        if dev > 1e-10 {
            return Err(Error::Invalid(format!(
                "density matrix not Hermitian (deviation {dev:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > 1e-8 {
            return Err(Error::Invalid(format!("density matrix trace {tr} differs from 1")));
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix without validation; used by propagators between checkpoints.
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity(&self, target: &StateVector) -> f64 {
        let a = target.amplitudes();
        let mut acc = ZERO;
        for r in 0..self.dim() {
            for c in 0..self.dim() {
                acc += a[r].conj() * self.matrix[(r, c)] * a[c];
            }
        }
        acc.re
    }

    /// `⟨n|ρ|n⟩`.
    pub fn population(&self, index: usize) -> f64 {
        self.matrix[(index, index)].re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix
            .hermitian_eigenvalues()
            .first()
            .copied()
            .unwrap_or(0.0)
    }
}
