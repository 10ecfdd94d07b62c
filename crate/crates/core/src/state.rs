//! Density matrices and column-stacking vectorization.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::{HilbertSpec, Spin};

/// Entrywise Hermiticity tolerance for a valid state.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Allowed deviation of the trace from one.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted as numerically positive.
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Hermitian, unit-trace, positive-semidefinite state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity against the module tolerances.
    pub fn from_matrix(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        let rho = Self { entries };
        let herm = rho.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (max |ρ - ρ†| = {herm:e})"
            )));
        }
        let tr = rho.trace();
        if (tr - 1.0).norm() > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {tr} differs from 1"
            )));
        }
        let min_eig = rho.min_eigenvalue();
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(entries: DMatrix<Complex64>) -> Self {
        Self { entries }
    }

    /// `|ψ⟩⟨ψ|` for a normalized copy of `psi`.
    pub fn from_pure(psi: &DVector<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::InvalidDensityMatrix("zero state vector".into()));
        }
        let psi = psi / Complex64::new(norm, 0.0);
        Ok(Self {
            entries: &psi * psi.adjoint(),
        })
    }

    pub fn basis_state(spec: HilbertSpec, fock: usize, spin: Spin) -> Self {
        let mut entries = DMatrix::from_element(spec.dim(), spec.dim(), Complex64::new(0.0, 0.0));
        let i = spec.index(fock, spin);
        entries[(i, i)] = Complex64::new(1.0, 0.0);
        Self { entries }
    }

    /// `|0, g⟩⟨0, g|`.
    pub fn vacuum(spec: HilbertSpec) -> Self {
        Self::basis_state(spec, 0, Spin::Ground)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Column-stacked `vec(ρ)`.
    pub fn to_vec(&self) -> DVector<Complex64> {
        vectorize(&self.entries)
    }
}

/// Column stacking: entry `(row, col)` lands at `col * d + row`.
pub fn vectorize(m: &DMatrix<Complex64>) -> DVector<Complex64> {
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`] for a `d × d` matrix.
pub fn unvectorize(v: &DVector<Complex64>, d: usize) -> Result<DMatrix<Complex64>> {
    if v.len() != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            found: v.len(),
        });
    }
    Ok(DMatrix::from_column_slice(d, d, v.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectorization_is_column_major() {
        let m = DMatrix::from_fn(3, 3, |i, j| Complex64::new((10 * i + j) as f64, 0.0));
        let v = vectorize(&m);
        assert_eq!(v[1], Complex64::new(10.0, 0.0));
        assert_eq!(v[3], Complex64::new(1.0, 0.0));
        assert_eq!(unvectorize(&v, 3).unwrap(), m);
    }

    #[test]
    fn rejects_invalid_states() {
        let z = Complex64::new(0.0, 0.0);
        let mut m = DMatrix::from_element(2, 2, z);
        m[(0, 0)] = Complex64::new(0.5, 0.0);
        assert!(DensityMatrix::from_matrix(m.clone()).is_err());
        m[(1, 1)] = Complex64::new(0.5, 0.0);
        m[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(DensityMatrix::from_matrix(m.clone()).is_err());
        m[(1, 0)] = Complex64::new(0.1, 0.0);
        assert!(DensityMatrix::from_matrix(m.clone()).is_ok());
        m[(0, 0)] = Complex64::new(1.5, 0.0);
        m[(1, 1)] = Complex64::new(-0.5, 0.0);
        assert!(DensityMatrix::from_matrix(m).is_err());
    }

    #[test]
    fn pure_state_is_valid() {
        let spec = HilbertSpec::new(2).unwrap();
        let psi = spec.basis_vector(0, Spin::Ground) + spec.basis_vector(1, Spin::Excited);
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        assert!(DensityMatrix::from_matrix(rho.matrix().clone()).is_ok());
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
    }
}
