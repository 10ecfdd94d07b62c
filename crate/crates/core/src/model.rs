//! Physical parameters and the Hamiltonians of the driven spin-magnon system.
//!
//! All rates and detunings are dimensionless multiples of the frequency unit
//! γ = 2π × 1 MHz. The rotating-frame Hamiltonian is
//!
//! ```text
//! H = (Δ + Δ_F) m†m + (Δ − Δ_F) σ₊σ₋ + g (m σ₊ + m† σ₋) + Ω_m (m† + m) + Ω_NV (σ₊ + σ₋)
//! ```

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{
    annihilation, creation, magnon_number, spin_excitation, spin_lowering, spin_raising,
    HilbertSpec, OperatorMatrix, Spin,
};

/// Frequency unit γ in rad/s.
pub const GAMMA_UNIT: f64 = 2.0 * PI * 1.0e6;

/// Rates and detunings in units of γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Spin-magnon coupling strength.
    pub g: f64,
    /// Decay rate shared by the magnon and the qubit.
    pub kappa: f64,
    /// Driving detuning Δ.
    pub delta: f64,
    /// Half of the magnon-qubit frequency detuning, Δ_F.
    pub delta_f: f64,
    /// Rabi frequency of the magnon drive.
    pub omega_m: f64,
    /// Rabi frequency of the qubit drive.
    pub omega_nv: f64,
    /// Equilibrium thermal magnon occupation.
    pub n_th: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            g: 20.0,
            kappa: 0.5,
            delta: 0.0,
            delta_f: 0.0,
            omega_m: 0.01,
            omega_nv: 0.0,
            n_th: 0.0,
        }
    }
}

fn finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<()> {
    finite(name, value)?;
    if value < 0.0 {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be non-negative",
        });
    }
    Ok(())
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        finite("g", self.g)?;
        finite("delta", self.delta)?;
        finite("delta_f", self.delta_f)?;
        finite("kappa", self.kappa)?;
        if self.kappa <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "kappa",
                value: self.kappa,
                reason: "must be positive",
            });
        }
        non_negative("omega_m", self.omega_m)?;
        non_negative("omega_nv", self.omega_nv)?;
        non_negative("n_th", self.n_th)?;
        Ok(())
    }

    /// Drive ratio λ = Ω_NV / Ω_m, undefined when the magnon is not driven.
    pub fn lambda(&self) -> Option<f64> {
        (self.omega_m > 0.0).then(|| self.omega_nv / self.omega_m)
    }

    /// Sets Ω_NV = λ Ω_m.
    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        non_negative("lambda", lambda)?;
        if self.omega_m <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "omega_m",
                value: self.omega_m,
                reason: "lambda requires a driven magnon (omega_m > 0)",
            });
        }
        self.omega_nv = lambda * self.omega_m;
        Ok(self)
    }

    pub fn with_detunings(mut self, delta: f64, delta_f: f64) -> Self {
        self.delta = delta;
        self.delta_f = delta_f;
        self
    }

    pub fn with_n_th(mut self, n_th: f64) -> Self {
        self.n_th = n_th;
        self
    }
}

/// Static-field inputs for the NV center and the Kittel mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalFieldParams {
    /// External field along the NV axis, tesla.
    pub b_z: f64,
    /// Zero-field splitting, rad/s.
    pub d0: f64,
    /// Gyromagnetic ratio magnitude, rad/s/T.
    pub gamma_e: f64,
}

impl PhysicalFieldParams {
    pub const DEFAULT_D0: f64 = 2.0 * PI * 2.87e9;
    pub const DEFAULT_GAMMA_E: f64 = 2.0 * PI * 28.0e9;

    pub fn new(b_z: f64) -> Self {
        Self {
            b_z,
            d0: Self::DEFAULT_D0,
            gamma_e: Self::DEFAULT_GAMMA_E,
        }
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("b_z", self.b_z)?;
        finite("d0", self.d0)?;
        finite("gamma_e", self.gamma_e)
    }

    /// Field at which magnon and qubit are resonant, `D₀ / (2|γ_e|)`.
    pub fn resonance_field(&self) -> f64 {
        self.d0 / (2.0 * self.gamma_e.abs())
    }
}

/// Angular frequencies (rad/s) derived from the static field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldDetunings {
    pub omega_m: f64,
    pub omega_nv: f64,
    pub delta_f: f64,
}

impl FieldDetunings {
    /// Δ_F expressed in units of γ.
    pub fn delta_f_in_gamma(&self) -> f64 {
        self.delta_f / GAMMA_UNIT
    }
}

/// ω_m = |γ_e| B_Z, ω_NV = D₀ − |γ_e| B_Z, Δ_F = |γ_e| B_Z − D₀/2.
pub fn field_to_detunings(p: &PhysicalFieldParams) -> FieldDetunings {
    let zeeman = p.gamma_e.abs() * p.b_z;
    FieldDetunings {
        omega_m: zeeman,
        omega_nv: p.d0 - zeeman,
        delta_f: zeeman - p.d0 / 2.0,
    }
}

/// Rotating-frame effective Hamiltonian.
pub fn build_h_eff(params: &SystemParams, spec: HilbertSpec) -> OperatorMatrix {
    let d = spec.dim();
    let mut h = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    let magnon_freq = params.delta + params.delta_f;
    let qubit_freq = params.delta - params.delta_f;

    for n in 0..=spec.n_max() {
        for spin in [Spin::Ground, Spin::Excited] {
            let i = spec.index(n, spin);
            h[(i, i)] = Complex64::new(
                n as f64 * magnon_freq + spin.index() as f64 * qubit_freq,
                0.0,
            );
        }
    }
    for n in 1..=spec.n_max() {
        let root = (n as f64).sqrt();
        // g m† σ₋ : |n-1, e⟩ → |n, g⟩
        let (up, down) = (
            spec.index(n, Spin::Ground),
            spec.index(n - 1, Spin::Excited),
        );
        h[(up, down)] += Complex64::new(params.g * root, 0.0);
        h[(down, up)] += Complex64::new(params.g * root, 0.0);
        for spin in [Spin::Ground, Spin::Excited] {
            let (hi, lo) = (spec.index(n, spin), spec.index(n - 1, spin));
            h[(hi, lo)] += Complex64::new(params.omega_m * root, 0.0);
            h[(lo, hi)] += Complex64::new(params.omega_m * root, 0.0);
        }
    }
    for n in 0..=spec.n_max() {
        let (e, g) = (spec.index(n, Spin::Excited), spec.index(n, Spin::Ground));
        h[(e, g)] += Complex64::new(params.omega_nv, 0.0);
        h[(g, e)] += Complex64::new(params.omega_nv, 0.0);
    }
    OperatorMatrix::from_matrix(h).expect("square by construction")
}

/// Reference construction of [`build_h_eff`] from operator products.
pub fn build_h_eff_from_operators(params: &SystemParams, spec: HilbertSpec) -> OperatorMatrix {
    let m = annihilation(spec);
    let md = creation(spec);
    let sm = spin_lowering(spec);
    let sp = spin_raising(spec);
    let terms = [
        &magnon_number(spec) * (params.delta + params.delta_f),
        &spin_excitation(spec) * (params.delta - params.delta_f),
        &(&(&m * &sp) + &(&md * &sm)) * params.g,
        &(&md + &m) * params.omega_m,
        &(&sp + &sm) * params.omega_nv,
    ];
    terms
        .iter()
        .fold(OperatorMatrix::zeros(spec.dim()), |acc, t| &acc + t)
}

/// `H_eff − (iκ/2)(m†m + σ₊σ₋)`.
pub fn build_h_nonhermitian(params: &SystemParams, spec: HilbertSpec) -> OperatorMatrix {
    let mut h = build_h_eff(params, spec).into_matrix();
    for i in 0..spec.dim() {
        let (n, spin) = spec.decompose(i);
        let excitations = (n + spin.index()) as f64;
        h[(i, i)] -= Complex64::new(0.0, 0.5 * params.kappa * excitations);
    }
    OperatorMatrix::from_matrix(h).expect("square by construction")
}

/// Dissipation channel `rate · D[o]` with `D[o]ρ = oρo† − ½{o†o, ρ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseOperator {
    pub rate: f64,
    pub operator: OperatorMatrix,
}

/// Magnon decay at κ(n_th + 1), thermal pumping at κ n_th (omitted when zero)
/// and zero-temperature qubit decay at κ.
pub fn collapse_operators(params: &SystemParams, spec: HilbertSpec) -> Vec<CollapseOperator> {
    let mut ops = vec![CollapseOperator {
        rate: params.kappa * (params.n_th + 1.0),
        operator: annihilation(spec),
    }];
    if params.n_th > 0.0 {
        ops.push(CollapseOperator {
            rate: params.kappa * params.n_th,
            operator: creation(spec),
        });
    }
    ops.push(CollapseOperator {
        rate: params.kappa,
        operator: spin_lowering(spec),
    });
    ops
}

/// Eigenvalues of the undriven Hamiltonian inside one excitation-number sector.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationSector {
    pub excitations: usize,
    /// Ascending.
    pub energies: Vec<f64>,
}

impl ExcitationSector {
    pub fn mean(&self) -> f64 {
        self.energies.iter().sum::<f64>() / self.energies.len() as f64
    }

    /// Half the spread between the highest and lowest level.
    pub fn half_splitting(&self) -> f64 {
        match (self.energies.first(), self.energies.last()) {
            (Some(lo), Some(hi)) => 0.5 * (hi - lo),
            _ => 0.0,
        }
    }
}

/// Dressed-state ladder of the drive-free Hamiltonian for sectors 0..=n_max.
///
/// Sector `n ≥ 1` is spanned by `|n, g⟩` and `|n − 1, e⟩`; its half-splitting is
/// `√(Δ_F² + n g²)`.
pub fn dressed_levels(params: &SystemParams, spec: HilbertSpec) -> Vec<ExcitationSector> {
    let undriven = SystemParams {
        omega_m: 0.0,
        omega_nv: 0.0,
        ..*params
    };
    let h = build_h_eff(&undriven, spec);
    (0..=spec.n_max())
        .map(|n| {
            let mut members = vec![spec.index(n, Spin::Ground)];
            if n >= 1 {
                members.push(spec.index(n - 1, Spin::Excited));
            }
            let block = DMatrix::from_fn(members.len(), members.len(), |i, j| {
                h.get(members[i], members[j])
            });
            let mut energies: Vec<f64> = block.symmetric_eigenvalues().iter().copied().collect();
            energies.sort_by(f64::total_cmp);
            ExcitationSector {
                excitations: n,
                energies,
            }
        })
        .collect()
}
