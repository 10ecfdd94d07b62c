//! Magnon occupation and second-order correlation functions.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolve::{propagate, EvolveOptions};
use crate::liouvillian::{build_liouvillian, steady_state, Liouvillian};
use crate::model::SystemParams;
use crate::operators::{annihilation, HilbertSpec, Spin};
use crate::state::{unvectorize, vectorize, DensityMatrix};

/// Below this `⟨m†m⟩` the normalized correlation is reported as undefined.
pub const VACUUM_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Occupation {
    /// `⟨m†m⟩`
    pub magnon: f64,
    /// `⟨σ₊σ₋⟩`
    pub qubit: f64,
}

fn check_dim(spec: HilbertSpec, d: usize) -> Result<()> {
    if spec.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: d,
        });
    }
    Ok(())
}

/// `Σ_n w(n) (ρ_{ng,ng} + ρ_{ne,ne})`, i.e. the expectation of a function of `m†m`.
fn fock_moment(m: &DMatrix<Complex64>, spec: HilbertSpec, weight: impl Fn(f64) -> f64) -> f64 {
    (0..=spec.n_max())
        .map(|n| {
            let w = weight(n as f64);
            w * (m[(spec.index(n, Spin::Ground), spec.index(n, Spin::Ground))].re
                + m[(spec.index(n, Spin::Excited), spec.index(n, Spin::Excited))].re)
        })
        .sum()
}

pub fn occupation(rho: &DensityMatrix, spec: HilbertSpec) -> Result<Occupation> {
    check_dim(spec, rho.dim())?;
    let m = rho.matrix();
    let qubit = (0..=spec.n_max())
        .map(|n| {
            let i = spec.index(n, Spin::Excited);
            m[(i, i)].re
        })
        .sum();
    Ok(Occupation {
        magnon: fock_moment(m, spec, |n| n),
        qubit,
    })
}

/// `⟨m†m†mm⟩ / ⟨m†m⟩²`.
pub fn g2_zero(rho: &DensityMatrix, spec: HilbertSpec) -> Result<f64> {
    check_dim(spec, rho.dim())?;
    let n = fock_moment(rho.matrix(), spec, |n| n);
    if n.is_nan() || n < VACUUM_FLOOR {
        return Err(Error::VacuumDominated { occupation: n });
    }
    let pairs = fock_moment(rho.matrix(), spec, |n| n * (n - 1.0));
    Ok((pairs / (n * n)).max(0.0))
}

/// Steady-state `g²(0)` and occupations for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStatistics {
    pub g2: f64,
    pub occupation: Occupation,
}

pub fn steady_statistics(params: &SystemParams, spec: HilbertSpec) -> Result<SteadyStatistics> {
    params.validate()?;
    let rho = steady_state(&build_liouvillian(params, spec)?)?;
    Ok(SteadyStatistics {
        g2: g2_zero(&rho, spec)?,
        occupation: occupation(&rho, spec)?,
    })
}

/// Time-delayed `g²(t) = ⟨m† m†(t) m(t) m⟩ / ⟨m†m⟩²` from the steady state.
pub fn g2_tau(params: &SystemParams, spec: HilbertSpec, times: &[f64]) -> Result<Vec<f64>> {
    params.validate()?;
    let l = build_liouvillian(params, spec)?;
    let rho = steady_state(&l)?;
    g2_tau_from(&l, &rho, spec, times, EvolveOptions::default())
}

/// Quantum regression: propagates `m ρ_ss m†` under `L` and reads out `m†m`.
///
/// The propagated operator is divided by `⟨m†m⟩` up front so that the
/// integrator's absolute tolerance is measured against an O(1) quantity; the
/// squared normalization is otherwise applied once at readout.
pub fn g2_tau_from(
    l: &Liouvillian,
    rho_ss: &DensityMatrix,
    spec: HilbertSpec,
    times: &[f64],
    opts: EvolveOptions,
) -> Result<Vec<f64>> {
    check_dim(spec, rho_ss.dim())?;
    if l.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: l.dim(),
        });
    }
    let n = fock_moment(rho_ss.matrix(), spec, |n| n);
    if n.is_nan() || n < VACUUM_FLOOR {
        return Err(Error::VacuumDominated { occupation: n });
    }
    let m = annihilation(spec);
    let b0 = m.matrix() * rho_ss.matrix() * m.matrix().adjoint() / Complex64::new(n, 0.0);
    let trajectory = propagate(l, &vectorize(&b0), times, opts)?;
    trajectory
        .iter()
        .map(|v| Ok(fock_moment(&unvectorize(v, spec.dim())?, spec, |k| k) / n))
        .collect()
}
