//! Operators on the truncated magnon ⊗ spin-qubit Hilbert space.
//!
//! Basis ordering is magnon-major: the state `|n, s⟩` with Fock index `n`
//! and spin index `s` (0 for `|g⟩`, 1 for `|e⟩`) sits at `n * 2 + s`.
//! Operators that would push a component above `n_max` simply drop it.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::DensityMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// State of the two-level spin qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Ground = 0,
    Excited = 1,
}

impl Spin {
    pub fn index(self) -> usize {
        self as usize
    }
}

/// Truncated Fock space of the magnon tensored with the spin qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HilbertSpec {
    n_max: usize,
}

impl HilbertSpec {
    pub const MIN_N_MAX: usize = 2;

    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < Self::MIN_N_MAX {
            return Err(Error::InvalidHilbertSpace { n_max });
        }
        Ok(Self { n_max })
    }

    /// Highest retained magnon Fock state.
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn magnon_dim(&self) -> usize {
        self.n_max + 1
    }

    /// Total dimension `2 (n_max + 1)`.
    pub fn dim(&self) -> usize {
        2 * self.magnon_dim()
    }

    /// Basis index of `|fock, spin⟩`.
    pub fn index(&self, fock: usize, spin: Spin) -> usize {
        debug_assert!(fock <= self.n_max);
        fock * 2 + spin.index()
    }

    /// Inverse of [`HilbertSpec::index`].
    pub fn decompose(&self, index: usize) -> (usize, Spin) {
        let spin = if index.is_multiple_of(2) {
            Spin::Ground
        } else {
            Spin::Excited
        };
        (index / 2, spin)
    }

    pub fn basis_vector(&self, fock: usize, spin: Spin) -> DVector<Complex64> {
        let mut v = DVector::from_element(self.dim(), ZERO);
        v[self.index(fock, spin)] = ONE;
        v
    }
}

/// Dense complex operator on a [`HilbertSpec`] basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn from_matrix(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        Ok(Self { entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: DMatrix::from_element(dim, dim, ZERO),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self {
            entries: self.entries.adjoint(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            entries: &self.entries * factor,
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `A - A†`.
    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        check_dim(self.dim(), v.len())?;
        Ok(&self.entries * v)
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn mul(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix {
            entries: &self.entries * &rhs.entries,
        }
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn add(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix {
            entries: &self.entries + &rhs.entries,
        }
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn sub(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix {
            entries: &self.entries - &rhs.entries,
        }
    }
}

impl Mul<f64> for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn mul(self, rhs: f64) -> OperatorMatrix {
        OperatorMatrix {
            entries: &self.entries * Complex64::new(rhs, 0.0),
        }
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Magnon annihilation operator `m ⊗ I₂`.
pub fn annihilation(spec: HilbertSpec) -> OperatorMatrix {
    let mut op = OperatorMatrix::zeros(spec.dim());
    for n in 1..=spec.n_max() {
        let amp = Complex64::new((n as f64).sqrt(), 0.0);
        for spin in [Spin::Ground, Spin::Excited] {
            op.entries[(spec.index(n - 1, spin), spec.index(n, spin))] = amp;
        }
    }
    op
}

/// Magnon creation operator `m† ⊗ I₂`; the `|n_max⟩ → |n_max + 1⟩` component is dropped.
pub fn creation(spec: HilbertSpec) -> OperatorMatrix {
    annihilation(spec).dagger()
}

/// Magnon number operator `m†m ⊗ I₂`.
pub fn magnon_number(spec: HilbertSpec) -> OperatorMatrix {
    let mut op = OperatorMatrix::zeros(spec.dim());
    for i in 0..spec.dim() {
        let (n, _) = spec.decompose(i);
        op.entries[(i, i)] = Complex64::new(n as f64, 0.0);
    }
    op
}

/// Spin lowering operator `I ⊗ σ₋` with `σ₋|e⟩ = |g⟩`.
pub fn spin_lowering(spec: HilbertSpec) -> OperatorMatrix {
    let mut op = OperatorMatrix::zeros(spec.dim());
    for n in 0..=spec.n_max() {
        op.entries[(spec.index(n, Spin::Ground), spec.index(n, Spin::Excited))] = ONE;
    }
    op
}

pub fn spin_raising(spec: HilbertSpec) -> OperatorMatrix {
    spin_lowering(spec).dagger()
}

/// Projector `σ₊σ₋` onto spin-excited states.
pub fn spin_excitation(spec: HilbertSpec) -> OperatorMatrix {
    let mut op = OperatorMatrix::zeros(spec.dim());
    for n in 0..=spec.n_max() {
        let i = spec.index(n, Spin::Excited);
        op.entries[(i, i)] = ONE;
    }
    op
}

pub fn dagger(op: &OperatorMatrix) -> OperatorMatrix {
    op.dagger()
}

/// `Tr(ρ A)`.
pub fn expectation(op: &OperatorMatrix, rho: &DensityMatrix) -> Result<Complex64> {
    check_dim(op.dim(), rho.dim())?;
    let a = op.matrix();
    let r = rho.matrix();
    let d = op.dim();
    let mut acc = ZERO;
    for i in 0..d {
        for j in 0..d {
            acc += r[(i, j)] * a[(j, i)];
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n_max: usize) -> HilbertSpec {
        HilbertSpec::new(n_max).unwrap()
    }

    #[test]
    fn rejects_too_small_truncation() {
        assert_eq!(
            HilbertSpec::new(1),
            Err(Error::InvalidHilbertSpace { n_max: 1 })
        );
        assert_eq!(spec(2).dim(), 6);
    }

    #[test]
    fn bosonic_matrix_element() {
        let s = spec(2);
        let m = annihilation(s);
        let el = m.get(s.index(1, Spin::Ground), s.index(2, Spin::Ground));
        assert_eq!(el, Complex64::new(2f64.sqrt(), 0.0));
    }

    #[test]
    fn annihilation_kills_vacuum() {
        let s = spec(2);
        let m = annihilation(s);
        let out = m.apply(&s.basis_vector(0, Spin::Ground)).unwrap();
        assert!(out.iter().all(|z| *z == ZERO));
    }

    #[test]
    fn number_operator_diagonal() {
        let s = spec(5);
        let m = annihilation(s);
        let n = &m.dagger() * &m;
        let expected = [0.0, 0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0, 5.0, 5.0];
        for (i, e) in expected.iter().enumerate() {
            assert!((n.get(i, i).re - e).abs() < 1e-14);
        }
        assert!(n.max_abs_diff(&magnon_number(s)) < 1e-14);
    }

    #[test]
    fn spin_lowering_definition() {
        let s = spec(3);
        let sm = spin_lowering(s);
        assert_eq!(
            sm.get(s.index(0, Spin::Ground), s.index(0, Spin::Excited)),
            ONE
        );
        let sq = &sm * &sm;
        assert!(sq.matrix().iter().all(|z| *z == ZERO));
        let proj = &sm.dagger() * &sm;
        assert_eq!(proj, spin_excitation(s));
    }

    #[test]
    fn truncated_commutator_is_identity_below_top() {
        let s = spec(6);
        let m = annihilation(s);
        let c = m.commutator(&m.dagger());
        for i in 0..s.dim() {
            for j in 0..s.dim() {
                let (ni, _) = s.decompose(i);
                let (nj, _) = s.decompose(j);
                if ni < s.n_max() && nj < s.n_max() {
                    let expected = if i == j { ONE } else { ZERO };
                    assert!((c.get(i, j) - expected).norm() < 1e-14, "entry ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn spin_anticommutator_is_identity() {
        let s = spec(4);
        let sm = spin_lowering(s);
        let ac = sm.anticommutator(&sm.dagger());
        assert_eq!(ac, OperatorMatrix::identity(s.dim()));
    }

    #[test]
    fn construction_is_bitwise_deterministic() {
        let s = spec(7);
        assert_eq!(annihilation(s), annihilation(s));
        assert_eq!(spin_lowering(s), spin_lowering(s));
    }

    #[test]
    fn expectation_checks_dimensions() {
        let rho = DensityMatrix::vacuum(spec(3));
        let op = OperatorMatrix::identity(spec(2).dim());
        assert_eq!(
            expectation(&op, &rho),
            Err(Error::DimensionMismatch {
                expected: 6,
                found: 8
            })
        );
    }

    #[test]
    fn expectation_trivial_cases() {
        let s = spec(3);
        let rho = DensityMatrix::vacuum(s);
        let id = OperatorMatrix::identity(s.dim());
        assert_eq!(expectation(&id, &rho).unwrap(), ONE);
        assert_eq!(expectation(&magnon_number(s), &rho).unwrap(), ZERO);
    }

    #[test]
    fn from_matrix_requires_square() {
        let m = DMatrix::from_element(2, 3, ZERO);
        assert!(OperatorMatrix::from_matrix(m).is_err());
    }
}
