//! Time integration of `dρ/dt = L ρ` with an adaptive Dormand–Prince 5(4) pair.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::liouvillian::Liouvillian;
use crate::state::{unvectorize, DensityMatrix};

/// Trace drift above which output states are renormalized.
pub const TRACE_DRIFT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

/// States at the requested times.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// Largest `|Tr ρ(t) − 1|` seen before any renormalization.
    pub max_trace_drift: f64,
    /// Whether any output state was renormalized.
    pub renormalized: bool,
}

/// Compressed-row copy of the generator; the matrix is mostly zeros.
struct SparseGenerator {
    row_start: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<Complex64>,
    max_row_sum: f64,
}

impl SparseGenerator {
    fn new(l: &Liouvillian) -> Self {
        let m = l.matrix();
        let n = m.nrows();
        let mut row_start = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        let mut max_row_sum = 0.0f64;
        row_start.push(0);
        for r in 0..n {
            let mut row_sum = 0.0;
            for c in 0..n {
                let v = m[(r, c)];
                if v != Complex64::new(0.0, 0.0) {
                    cols.push(c);
                    values.push(v);
                    row_sum += v.norm();
                }
            }
            max_row_sum = max_row_sum.max(row_sum);
            row_start.push(cols.len());
        }
        Self {
            row_start,
            cols,
            values,
            max_row_sum,
        }
    }

    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_start[r]..self.row_start[r + 1] {
                acc += self.values[k] * x[self.cols[k]];
            }
            *o = acc;
        }
    }
}

// Dormand–Prince 5(4) tableau; the generator is autonomous so the nodes are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

fn validate_times(times: &[f64]) -> Result<()> {
    let mut prev = 0.0;
    for &t in times {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidTimes(format!(
                "times must be finite and non-negative, got {t}"
            )));
        }
        if t < prev {
            return Err(Error::InvalidTimes(format!(
                "times must be sorted ascending ({t} after {prev})"
            )));
        }
        prev = t;
    }
    Ok(())
}

/// Integrates an arbitrary vectorized operator `x(t) = e^{Lt} x₀` to each time.
///
/// `times` must be sorted and non-negative; integration starts at `t = 0`.
pub fn propagate(
    l: &Liouvillian,
    x0: &DVector<Complex64>,
    times: &[f64],
    opts: EvolveOptions,
) -> Result<Vec<DVector<Complex64>>> {
    validate_times(times)?;
    let n = l.dim() * l.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x0.len(),
        });
    }
    let gen = SparseGenerator::new(l);

    let mut y: Vec<Complex64> = x0.iter().copied().collect();
    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); n]; 7];
    let mut stage = vec![Complex64::new(0.0, 0.0); n];
    let mut y_new = vec![Complex64::new(0.0, 0.0); n];
    gen.apply(&y, &mut k[0]);

    let mut t = 0.0f64;
    let horizon = times.last().copied().unwrap_or(0.0);
    let mut h = if gen.max_row_sum > 0.0 {
        (0.05 / gen.max_row_sum).min(horizon.max(f64::MIN_POSITIVE))
    } else {
        horizon
    };
    let mut out = Vec::with_capacity(times.len());

    for &target in times {
        while t < target {
            let remaining = target - t;
            let clamped = h >= remaining;
            let step = if clamped { remaining } else { h };
            if step < 16.0 * f64::EPSILON * t.abs().max(1.0) && !clamped {
                return Err(Error::StepSizeUnderflow { t, step });
            }

            for s in 1..7 {
                for i in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, kj) in k.iter().enumerate().take(s) {
                        let a = A[s][j];
                        if a != 0.0 {
                            acc += kj[i] * a;
                        }
                    }
                    stage[i] = y[i] + acc * step;
                }
                gen.apply(&stage, &mut k[s]);
            }
            // The last stage point is the fifth-order solution (FSAL).
            y_new.copy_from_slice(&stage);

            let mut err_sq = 0.0;
            for i in 0..n {
                let mut e = Complex64::new(0.0, 0.0);
                for (j, kj) in k.iter().enumerate() {
                    if E[j] != 0.0 {
                        e += kj[i] * E[j];
                    }
                }
                e *= step;
                let scale = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
                err_sq += (e.norm() / scale).powi(2);
            }
            let err = (err_sq / n as f64).sqrt();

            if err <= 1.0 {
                t = if clamped { target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                k.swap(0, 6);
                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                // A step shortened to land on an output time does not limit the next one.
                h = if clamped {
                    h.max(step * factor)
                } else {
                    step * factor
                };
            } else {
                h = step * (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
                if h < 16.0 * f64::EPSILON * t.abs().max(1.0) {
                    return Err(Error::StepSizeUnderflow { t, step: h });
                }
            }
        }
        out.push(DVector::from_column_slice(&y));
    }
    Ok(out)
}

/// Evolves a density matrix to each of `times` under `L`.
pub fn evolve(l: &Liouvillian, rho0: &DensityMatrix, times: &[f64]) -> Result<Evolution> {
    evolve_with(l, rho0, times, EvolveOptions::default())
}

pub fn evolve_with(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    times: &[f64],
    opts: EvolveOptions,
) -> Result<Evolution> {
    if rho0.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            found: rho0.dim(),
        });
    }
    let raw = propagate(l, &rho0.to_vec(), times, opts)?;
    let mut max_trace_drift = 0.0f64;
    let mut renormalized = false;
    let mut states = Vec::with_capacity(raw.len());
    for (v, &t) in raw.iter().zip(times) {
        if t == 0.0 {
            states.push(rho0.clone());
            continue;
        }
        let mut m = unvectorize(v, l.dim())?;
        let tr = m.trace();
        let drift = (tr - 1.0).norm();
        max_trace_drift = max_trace_drift.max(drift);
        if drift > TRACE_DRIFT_TOL {
            m /= tr;
            renormalized = true;
        }
        states.push(DensityMatrix::from_matrix_unchecked(m));
    }
    Ok(Evolution {
        times: times.to_vec(),
        states,
        max_trace_drift,
        renormalized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::{build_liouvillian, steady_state};
    use crate::model::{CollapseOperator, SystemParams};
    use crate::operators::{
        annihilation, expectation, magnon_number, HilbertSpec, OperatorMatrix, Spin,
    };

    fn decay_generator(spec: HilbertSpec, kappa: f64) -> Liouvillian {
        let channel = CollapseOperator {
            rate: kappa,
            operator: annihilation(spec),
        };
        Liouvillian::from_parts(&OperatorMatrix::zeros(spec.dim()), &[channel]).unwrap()
    }

    #[test]
    fn exponential_decay_law() {
        let s = HilbertSpec::new(3).unwrap();
        let kappa = 0.5;
        let l = decay_generator(s, kappa);
        let rho0 = DensityMatrix::basis_state(s, 1, Spin::Ground);
        let times = [0.5, 1.0, 3.0, 10.0];
        let ev = evolve(&l, &rho0, &times).unwrap();
        for (rho, &t) in ev.states.iter().zip(&times) {
            let n = expectation(&magnon_number(s), rho).unwrap().re;
            assert!((n - (-kappa * t).exp()).abs() < 1e-8, "t = {t}: {n}");
        }
        assert!(ev.max_trace_drift < 1e-9);
        assert!(!ev.renormalized);
    }

    #[test]
    fn zero_time_returns_initial_state() {
        let s = HilbertSpec::new(3).unwrap();
        let l = decay_generator(s, 1.0);
        let rho0 = DensityMatrix::basis_state(s, 2, Spin::Excited);
        let ev = evolve(&l, &rho0, &[0.0, 0.0]).unwrap();
        assert_eq!(ev.states[0], rho0);
        assert_eq!(ev.states[1], rho0);
    }

    #[test]
    fn rejects_bad_time_grids() {
        let s = HilbertSpec::new(2).unwrap();
        let l = decay_generator(s, 1.0);
        let rho0 = DensityMatrix::vacuum(s);
        assert!(matches!(
            evolve(&l, &rho0, &[1.0, 0.5]),
            Err(Error::InvalidTimes(_))
        ));
        assert!(matches!(
            evolve(&l, &rho0, &[-1.0]),
            Err(Error::InvalidTimes(_))
        ));
        assert!(matches!(
            evolve(&l, &rho0, &[f64::NAN]),
            Err(Error::InvalidTimes(_))
        ));
    }

    #[test]
    fn steady_state_is_a_fixed_point() {
        let s = HilbertSpec::new(5).unwrap();
        let p = SystemParams {
            g: 3.0,
            delta: 2.5,
            delta_f: -1.0,
            omega_m: 0.2,
            omega_nv: 0.1,
            ..Default::default()
        };
        let l = build_liouvillian(&p, s).unwrap();
        let rho = steady_state(&l).unwrap();
        let times: Vec<f64> = (0..=10).map(|i| i as f64 / p.kappa).collect();
        let ev = evolve(&l, &rho, &times).unwrap();
        for st in &ev.states {
            let drift = (st.matrix() - rho.matrix())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(drift < 1e-8, "drift {drift}");
        }
    }

    #[test]
    fn unitary_rotation_matches_closed_form() {
        // Driven qubit alone: Rabi oscillation of the excited population.
        let s = HilbertSpec::new(2).unwrap();
        let p = SystemParams {
            g: 0.0,
            kappa: 1.0,
            delta: 0.0,
            delta_f: 0.0,
            omega_m: 0.0,
            omega_nv: 1.3,
            n_th: 0.0,
        };
        let h = crate::model::build_h_eff(&p, s);
        let l = Liouvillian::from_parts(&h, &[]).unwrap();
        let times = [0.3, 1.1, 2.5];
        let ev = evolve(&l, &DensityMatrix::vacuum(s), &times).unwrap();
        for (rho, &t) in ev.states.iter().zip(&times) {
            let pe = rho.matrix()[(1, 1)].re;
            assert!((pe - (1.3 * t).sin().powi(2)).abs() < 1e-8);
        }
    }
}
