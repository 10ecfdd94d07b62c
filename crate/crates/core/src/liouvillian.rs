//! Liouvillian superoperator and its steady state.
//!
//! Vectorization is column stacking, so `A ρ B ↦ (Bᵀ ⊗ A) vec(ρ)`, and the
//! generator is
//!
//! ```text
//! L vec(ρ) = vec(−i[H, ρ] + Σ_k rate_k (o_k ρ o_k† − ½{o_k† o_k, ρ}))
//! ```

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{build_h_eff, collapse_operators, CollapseOperator, SystemParams};
use crate::operators::{HilbertSpec, OperatorMatrix};
use crate::state::{unvectorize, vectorize, DensityMatrix};

/// Accepted `‖L vec(ρ)‖ / ‖L‖` for a steady state.
pub const STEADY_STATE_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const REFINEMENT_STEPS: usize = 2;

/// Dense `d² × d²` generator acting on column-stacked density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    d: usize,
    entries: DMatrix<Complex64>,
}

fn nonzeros(m: &DMatrix<Complex64>) -> Vec<(usize, usize, Complex64)> {
    let mut out = Vec::new();
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let v = m[(r, c)];
            if v != ZERO {
                out.push((r, c, v));
            }
        }
    }
    out
}

impl Liouvillian {
    /// Builds the generator from a Hermitian Hamiltonian and dissipation channels.
    pub fn from_parts(h: &OperatorMatrix, collapse: &[CollapseOperator]) -> Result<Self> {
        let d = h.dim();
        let scale = h.matrix().iter().map(|z| z.norm()).fold(1.0, f64::max);
        let herm = h.hermiticity_error();
        if herm > 1e-12 * scale {
            return Err(Error::NotHermitian { error: herm });
        }
        for c in collapse {
            if c.operator.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: c.operator.dim(),
                });
            }
            if !(c.rate >= 0.0 && c.rate.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "rate",
                    value: c.rate,
                    reason: "collapse rates must be finite and non-negative",
                });
            }
        }

        let mut l = Self {
            d,
            entries: DMatrix::from_element(d * d, d * d, ZERO),
        };
        let identity = DMatrix::<Complex64>::identity(d, d);
        let minus_i = Complex64::new(0.0, -1.0);
        l.add_sandwich(minus_i, h.matrix(), &identity);
        l.add_sandwich(-minus_i, &identity, h.matrix());
        for c in collapse.iter().filter(|c| c.rate > 0.0) {
            let o = c.operator.matrix();
            let od = o.adjoint();
            let odo = &od * o;
            let rate = Complex64::new(c.rate, 0.0);
            l.add_sandwich(rate, o, &od);
            l.add_sandwich(-0.5 * rate, &odo, &identity);
            l.add_sandwich(-0.5 * rate, &identity, &odo);
        }
        Ok(l)
    }

    /// Adds `coeff · (Bᵀ ⊗ A)`, the matrix of `ρ ↦ coeff · A ρ B`.
    fn add_sandwich(&mut self, coeff: Complex64, a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) {
        let d = self.d;
        let a_nz = nonzeros(a);
        for (bl, bj, bv) in nonzeros(b) {
            let w = coeff * bv;
            for &(ai, ak, av) in &a_nz {
                self.entries[(bj * d + ai, bl * d + ak)] += w * av;
            }
        }
    }

    /// Hilbert-space dimension `d`.
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }

    pub fn apply_vec(&self, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if v.len() != self.d * self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d * self.d,
                found: v.len(),
            });
        }
        Ok(&self.entries * v)
    }

    /// `L(X)` as a matrix.
    pub fn apply(&self, x: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        if x.nrows() != self.d || x.ncols() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: x.nrows(),
            });
        }
        unvectorize(&self.apply_vec(&vectorize(x))?, self.d)
    }

    /// `‖L vec(ρ)‖ / ‖L‖`.
    pub fn relative_residual(&self, rho: &DensityMatrix) -> Result<f64> {
        let r = self.apply_vec(&rho.to_vec())?;
        let norm = self.norm();
        Ok(if norm == 0.0 {
            r.norm()
        } else {
            r.norm() / norm
        })
    }
}

/// Liouvillian of the driven spin-magnon system.
///
/// Fails only for non-finite inputs or negative dissipation rates.
pub fn build_liouvillian(params: &SystemParams, spec: HilbertSpec) -> Result<Liouvillian> {
    let h = build_h_eff(params, spec);
    Liouvillian::from_parts(&h, &collapse_operators(params, spec))
}

/// Real coordinates of a Hermitian `d × d` matrix: the diagonal, then
/// `(Re ρ_pq, Im ρ_pq)` for every `p < q`.
struct HermitianCoords {
    d: usize,
    pairs: Vec<(usize, usize)>,
}

impl HermitianCoords {
    fn new(d: usize) -> Self {
        let mut pairs = Vec::with_capacity(d * (d - 1) / 2);
        for p in 0..d {
            for q in p + 1..d {
                pairs.push((p, q));
            }
        }
        Self { d, pairs }
    }

    fn len(&self) -> usize {
        self.d * self.d
    }

    fn vec_index(&self, row: usize, col: usize) -> usize {
        col * self.d + row
    }

    /// Real matrix of `L` restricted to Hermitian arguments.
    fn reduce(&self, l: &DMatrix<Complex64>) -> DMatrix<f64> {
        let n = self.len();
        let d = self.d;
        let i = Complex64::new(0.0, 1.0);
        let mut real = DMatrix::<f64>::zeros(n, n);
        let mut column = DVector::<Complex64>::from_element(n, ZERO);

        for k in 0..n {
            if k < d {
                column.copy_from(&l.column(self.vec_index(k, k)));
            } else {
                let (p, q) = self.pairs[(k - d) / 2];
                let upper = l.column(self.vec_index(p, q));
                let lower = l.column(self.vec_index(q, p));
                if (k - d).is_multiple_of(2) {
                    column.copy_from(&(upper + lower));
                } else {
                    column.copy_from(&((upper - lower) * i));
                }
            }
            for p in 0..d {
                real[(p, k)] = column[self.vec_index(p, p)].re;
            }
            for (m, &(p, q)) in self.pairs.iter().enumerate() {
                let z = column[self.vec_index(p, q)];
                real[(d + 2 * m, k)] = z.re;
                real[(d + 2 * m + 1, k)] = z.im;
            }
        }
        real
    }

    fn expand(&self, x: &DVector<f64>) -> DMatrix<Complex64> {
        let d = self.d;
        let mut rho = DMatrix::from_element(d, d, ZERO);
        for p in 0..d {
            rho[(p, p)] = Complex64::new(x[p], 0.0);
        }
        for (m, &(p, q)) in self.pairs.iter().enumerate() {
            let z = Complex64::new(x[d + 2 * m], x[d + 2 * m + 1]);
            rho[(p, q)] = z;
            rho[(q, p)] = z.conj();
        }
        rho
    }
}

/// Unique steady state of a Hermiticity-preserving Liouvillian.
///
/// Solves `L vec(ρ) = 0` with the first equation replaced by `Tr ρ = 1`, in the
/// real coordinates of Hermitian matrices, by LU with iterative refinement.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    let coords = HermitianCoords::new(l.dim());
    let n = coords.len();
    let mut system = coords.reduce(l.matrix());
    for k in 0..n {
        system[(0, k)] = if k < l.dim() { 1.0 } else { 0.0 };
    }
    let mut rhs = DVector::<f64>::zeros(n);
    rhs[0] = 1.0;

    let lu = system.clone().lu();
    let pivots = lu.u().diagonal().map(f64::abs);
    let pivot_ratio = pivots.min() / pivots.max();
    if pivot_ratio.is_nan() || pivot_ratio <= n as f64 * f64::EPSILON {
        return Err(Error::NonUniqueSteadyState { pivot_ratio });
    }
    let mut x = lu
        .solve(&rhs)
        .ok_or(Error::NonUniqueSteadyState { pivot_ratio })?;
    for _ in 0..REFINEMENT_STEPS {
        let residual = &rhs - &system * &x;
        if let Some(dx) = lu.solve(&residual) {
            x += dx;
        }
    }

    let mut rho = coords.expand(&x);
    let trace: f64 = (0..l.dim()).map(|p| rho[(p, p)].re).sum();
    rho /= Complex64::new(trace, 0.0);
    let rho = DensityMatrix::from_matrix_unchecked(rho);

    let residual = l.relative_residual(&rho)?;
    if residual.is_nan() || residual >= STEADY_STATE_TOL {
        return Err(Error::SteadyStateResidual {
            residual,
            tolerance: STEADY_STATE_TOL,
        });
    }
    Ok(rho)
}
