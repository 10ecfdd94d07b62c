//! Weak-drive closed forms in the two-excitation truncation.
//!
//! With `Δ̄ = Δ − iκ/2`, the non-Hermitian amplitude equations give
//! `C = g² − Δ̄² + Δ_F²` and `D = 2Δ̄² + 2Δ̄Δ_F − g²` as the one- and
//! two-excitation determinants. The condition solvers work with the κ→0
//! zeros of the factored magnitudes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemParams;

/// Magnitudes of `C`, `D` and `C₁g` below this are reported as singular.
pub const SINGULARITY_FLOOR: f64 = 1e-12;

/// Relative tolerance used to classify a vanishing discriminant as degenerate.
const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveMode {
    Single,
    Double,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeSet {
    pub c0e: Complex64,
    pub c1g: Complex64,
    pub c1e: Complex64,
    pub c2g: Complex64,
    pub a_sq: f64,
    pub b_sq: f64,
    pub c_sq: f64,
    pub d_sq: f64,
    pub drive_mode: DriveMode,
}

impl AmplitudeSet {
    /// `2|C₂g|² / |C₁g|⁴`.
    pub fn g2(&self) -> Result<f64> {
        let p1 = self.c1g.norm_sqr();
        if p1.sqrt() < SINGULARITY_FLOOR {
            return Err(Error::AnalyticSingularity {
                quantity: "C1g",
                magnitude: p1.sqrt(),
            });
        }
        Ok(2.0 * self.c2g.norm_sqr() / (p1 * p1))
    }

    /// `|B|²|C|² / (|A|²|D|²)`.
    pub fn factored_g2(&self) -> f64 {
        self.b_sq * self.c_sq / (self.a_sq * self.d_sq)
    }
}

fn check_inputs(p: &SystemParams) -> Result<()> {
    let fields = [
        ("g", p.g),
        ("kappa", p.kappa),
        ("delta", p.delta),
        ("delta_f", p.delta_f),
        ("omega_m", p.omega_m),
        ("omega_nv", p.omega_nv),
    ];
    for (name, value) in fields {
        if !value.is_finite() {
            return Err(Error::InvalidParameter {
                name,
                value,
                reason: "must be finite",
            });
        }
    }
    if p.kappa < 0.0 {
        return Err(Error::InvalidParameter {
            name: "kappa",
            value: p.kappa,
            reason: "must be non-negative",
        });
    }
    if p.omega_m <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "omega_m",
            value: p.omega_m,
            reason: "the analytic amplitudes require a magnon drive",
        });
    }
    if p.omega_nv < 0.0 {
        return Err(Error::InvalidParameter {
            name: "omega_nv",
            value: p.omega_nv,
            reason: "must be non-negative",
        });
    }
    Ok(())
}

struct Determinants {
    delta_bar: Complex64,
    c: Complex64,
    d: Complex64,
}

fn determinants(p: &SystemParams) -> Result<Determinants> {
    let db = Complex64::new(p.delta, -0.5 * p.kappa);
    let g2 = p.g * p.g;
    let c = g2 - db * db + p.delta_f * p.delta_f;
    let d = 2.0 * db * db + 2.0 * db * p.delta_f - g2;
    if c.norm() < SINGULARITY_FLOOR {
        return Err(Error::AnalyticSingularity {
            quantity: "C",
            magnitude: c.norm(),
        });
    }
    if d.norm() < SINGULARITY_FLOOR {
        return Err(Error::AnalyticSingularity {
            quantity: "D",
            magnitude: d.norm(),
        });
    }
    Ok(Determinants {
        delta_bar: db,
        c,
        d,
    })
}

fn magnitudes(
    p: &SystemParams,
    lambda: f64,
    mode: DriveMode,
    c0e: Complex64,
    c1g: Complex64,
    c1e: Complex64,
    c2g: Complex64,
) -> AmplitudeSet {
    AmplitudeSet {
        c0e,
        c1g,
        c1e,
        c2g,
        a_sq: a_sq(p.g, p.kappa, lambda, p.delta, p.delta_f),
        b_sq: b_sq(p.g, p.kappa, lambda, p.delta, p.delta_f),
        c_sq: c_sq(p.g, p.kappa, p.delta, p.delta_f),
        d_sq: d_sq(p.g, p.kappa, p.delta, p.delta_f),
        drive_mode: mode,
    }
}

/// Single-drive amplitudes; `omega_nv` is ignored.
pub fn amplitudes_single(p: &SystemParams) -> Result<AmplitudeSet> {
    check_inputs(p)?;
    let Determinants {
        delta_bar: db,
        c,
        d,
    } = determinants(p)?;
    let (g, df, om) = (p.g, p.delta_f, p.omega_m);
    let s2 = std::f64::consts::SQRT_2;

    let c0e = -om * g / c;
    let c1g = om * (db - df) / c;
    let c1e = 2.0 * om * om * g * db / (c * d);
    let c2g = (-2.0 * s2 * om * om * db * db + 2.0 * s2 * om * om * df * db - s2 * om * om * g * g)
        / (2.0 * c * d);
    Ok(magnitudes(p, 0.0, DriveMode::Single, c0e, c1g, c1e, c2g))
}

/// Double-drive amplitudes; valid for any `omega_nv ≥ 0`.
pub fn amplitudes_double(p: &SystemParams) -> Result<AmplitudeSet> {
    check_inputs(p)?;
    let Determinants {
        delta_bar: db,
        c,
        d,
    } = determinants(p)?;
    let (g, df, om, on) = (p.g, p.delta_f, p.omega_m, p.omega_nv);
    let s2 = std::f64::consts::SQRT_2;

    let c0e = (on * (db + df) - om * g) / c;
    let c1g = (om * (db - df) - on * g) / c;
    let c1e = -(4.0 * om * on * db * db
        + (4.0 * om * on * df - 4.0 * om * om * g - 2.0 * on * on * g) * db
        + 2.0 * om * on * g * g
        - 2.0 * on * on * g * df)
        / (2.0 * c * d);
    let c2g = (-2.0 * s2 * om * om * db * db
        + (4.0 * s2 * om * on * g + 2.0 * s2 * om * om * df) * db
        - s2 * (om * om + on * on) * g * g)
        / (2.0 * c * d);
    let lambda = on / om;
    Ok(magnitudes(p, lambda, DriveMode::Double, c0e, c1g, c1e, c2g))
}

/// Chooses the single-drive form when `Ω_NV = 0`, the double-drive form otherwise.
pub fn amplitudes(p: &SystemParams) -> Result<AmplitudeSet> {
    if p.omega_nv == 0.0 {
        amplitudes_single(p)
    } else {
        amplitudes_double(p)
    }
}

pub fn g2_analytic(p: &SystemParams) -> Result<f64> {
    amplitudes(p)?.g2()
}

/// `|A|² = [(Δ − Δ_F − λg)² + κ²/4]²`.
pub fn a_sq(g: f64, kappa: f64, lambda: f64, delta: f64, delta_f: f64) -> f64 {
    let x = delta - delta_f - lambda * g;
    let s = x * x + 0.25 * kappa * kappa;
    s * s
}

/// `|B|²`; the real part vanishes on the κ→0 UMB locus.
pub fn b_sq(g: f64, kappa: f64, lambda: f64, delta: f64, delta_f: f64) -> f64 {
    let re = -2.0 * (delta * delta - 0.25 * kappa * kappa)
        + (4.0 * lambda * g + 2.0 * delta_f) * delta
        - (1.0 + lambda * lambda) * g * g;
    let im = kappa * (2.0 * delta - 2.0 * lambda * g - delta_f);
    re * re + im * im
}

pub fn c_sq(g: f64, kappa: f64, delta: f64, delta_f: f64) -> f64 {
    let re = g * g + delta_f * delta_f - delta * delta + 0.25 * kappa * kappa;
    re * re + kappa * kappa * delta * delta
}

pub fn d_sq(g: f64, kappa: f64, delta: f64, delta_f: f64) -> f64 {
    let re = 2.0 * delta * delta + 2.0 * delta_f * delta - g * g - 0.5 * kappa * kappa;
    let im = kappa * (2.0 * delta + delta_f);
    re * re + im * im
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    RealPair,
    Degenerate,
    NoRealSolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSolution {
    /// Sorted ascending; empty iff the regime is `NoRealSolution`.
    pub roots: Vec<f64>,
    pub regime: Regime,
}

/// Roots of `Δ² − 2bΔ + c = 0`, i.e. `b ± √(b² − c)`.
fn centered_roots(center: f64, disc: f64, scale: f64) -> ConditionSolution {
    if disc.abs() <= DEGENERATE_TOL * scale.max(f64::MIN_POSITIVE) {
        ConditionSolution {
            roots: vec![center],
            regime: Regime::Degenerate,
        }
    } else if disc < 0.0 {
        ConditionSolution {
            roots: Vec::new(),
            regime: Regime::NoRealSolution,
        }
    } else {
        let r = disc.sqrt();
        ConditionSolution {
            roots: vec![center - r, center + r],
            regime: Regime::RealPair,
        }
    }
}

/// Conventional blockade: `Δ = ±√(g² + Δ_F²)`.
pub fn cmb_condition(g: f64, delta_f: f64) -> ConditionSolution {
    let r2 = g * g + delta_f * delta_f;
    if r2 == 0.0 {
        return ConditionSolution {
            roots: vec![0.0],
            regime: Regime::Degenerate,
        };
    }
    let r = r2.sqrt();
    ConditionSolution {
        roots: vec![-r, r],
        regime: Regime::RealPair,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocusPoint {
    pub delta: f64,
    pub delta_f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UmbSingleSolution {
    /// κ→0 roots in Δ at the given Δ_F.
    pub kappa_free: ConditionSolution,
    /// Exact finite-κ zeros of `|B₁|²`: `(±√(2g² − κ²)/2, 2Δ)`, empty when `2g² < κ²`.
    pub finite_kappa: Vec<LocusPoint>,
}

/// Unconventional blockade with the magnon drive only.
pub fn umb_condition_single(g: f64, delta_f: f64, kappa: f64) -> UmbSingleSolution {
    let kappa_free = centered_roots(
        0.5 * delta_f,
        0.25 * delta_f * delta_f - 0.5 * g * g,
        0.25 * delta_f * delta_f + 0.5 * g * g,
    );
    let s = 2.0 * g * g - kappa * kappa;
    let finite_kappa = if s < 0.0 {
        Vec::new()
    } else if s == 0.0 {
        vec![LocusPoint {
            delta: 0.0,
            delta_f: 0.0,
        }]
    } else {
        let d = 0.5 * s.sqrt();
        vec![
            LocusPoint {
                delta: -d,
                delta_f: -2.0 * d,
            },
            LocusPoint {
                delta: d,
                delta_f: 2.0 * d,
            },
        ]
    };
    UmbSingleSolution {
        kappa_free,
        finite_kappa,
    }
}

/// Unconventional blockade with both drives: `Δ = Δ_F/2 + λg ± √((Δ_F/2 + λg)² − (1+λ²)g²/2)`.
pub fn umb_condition_double(g: f64, delta_f: f64, lambda: f64) -> ConditionSolution {
    let center = 0.5 * delta_f + lambda * g;
    let c = 0.5 * (1.0 + lambda * lambda) * g * g;
    centered_roots(center, center * center - c, center * center + c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntersectionPoint {
    /// 1, 2 or 3.
    pub index: u8,
    pub delta_f: Option<f64>,
    /// Detuning shared by the CMB branch and the lower UMB root.
    pub delta: Option<f64>,
    pub exists: bool,
}

/// Crossings of the conventional and double-drive unconventional loci.
pub fn intersection_points(g: f64, lambda: f64) -> Vec<IntersectionPoint> {
    let delta_at =
        |df: f64| (2.0 * df * df + (3.0 + lambda * lambda) * g * g) / (4.0 * lambda * g + 2.0 * df);
    let df1 = g * (1.0 - lambda * lambda) / (2.0 * lambda);
    let mut out = vec![IntersectionPoint {
        index: 1,
        delta_f: Some(df1),
        delta: Some(delta_at(df1)),
        exists: true,
    }];
    let disc = lambda * lambda - 8.0;
    let merged = disc.abs() <= DEGENERATE_TOL * 8.0;
    for (index, sign) in [(2u8, 1.0), (3u8, -1.0)] {
        let df = if disc > 0.0 || merged {
            Some(-g * (lambda + sign * 3.0 * disc.max(0.0).sqrt()) / 8.0)
        } else {
            None
        };
        out.push(IntersectionPoint {
            index,
            delta_f: df,
            delta: df.map(delta_at),
            exists: disc > 0.0 && !merged,
        });
    }
    out
}

/// Distance in Δ to the nearest κ→0 zero of `C`, `D` or `A` at the given Δ_F.
pub fn singularity_distance(p: &SystemParams) -> f64 {
    let (g, df) = (p.g, p.delta_f);
    let lambda = if p.omega_m > 0.0 {
        p.omega_nv / p.omega_m
    } else {
        0.0
    };
    let rc = (g * g + df * df).sqrt();
    let rd = (df * df + 2.0 * g * g).sqrt();
    [rc, -rc, 0.5 * (-df + rd), 0.5 * (-df - rd), df + lambda * g]
        .into_iter()
        .map(|z| (p.delta - z).abs())
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix4, Vector4};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(g: f64, delta: f64, delta_f: f64, lambda: f64) -> SystemParams {
        SystemParams {
            g,
            kappa: 0.5,
            delta,
            delta_f,
            omega_m: 0.01,
            omega_nv: 0.01 * lambda,
            n_th: 0.0,
        }
    }

    /// Solves the first- and second-order steady amplitude equations of the
    /// non-Hermitian Hamiltonian with `C₀g = 1`, in the order (C0e, C1g, C1e, C2g).
    fn oracle(p: &SystemParams) -> [Complex64; 4] {
        let db = Complex64::new(p.delta, -0.5 * p.kappa);
        let (g, df, om, on) = (p.g, p.delta_f, p.omega_m, p.omega_nv);
        let s2 = std::f64::consts::SQRT_2;
        let z = Complex64::new(0.0, 0.0);
        let r = |x: f64| Complex64::new(x, 0.0);
        #[rustfmt::skip]
        let a = Matrix4::new(
            db - df, r(g), z, z,
            r(g), db + df, z, z,
            r(om), r(on), 2.0 * db, r(s2 * g),
            z, r(s2 * om), r(s2 * g), 2.0 * (db + df),
        );
        // Second-order rows are driven by the first-order amplitudes; solving
        // the full lower block-triangular system at once is equivalent.
        let rhs = Vector4::new(r(-on), r(-om), z, z);
        let x = a.lu().solve(&rhs).unwrap();
        [x[0], x[1], x[2], x[3]]
    }

    fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
        (a - b).norm() <= rel * a.norm().max(b.norm()).max(1e-300)
    }

    #[test]
    fn amplitudes_match_direct_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let lambda = if rng.gen_bool(0.5) {
                0.0
            } else {
                rng.gen_range(0.1..6.0)
            };
            let p = params(
                rng.gen_range(0.5..20.0),
                rng.gen_range(-60.0..60.0),
                rng.gen_range(-60.0..60.0),
                lambda,
            );
            let a = amplitudes(&p).unwrap();
            let x = oracle(&p);
            for (got, want) in [a.c0e, a.c1g, a.c1e, a.c2g].into_iter().zip(x) {
                assert!(close(got, want, 1e-9), "{p:?}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn double_reduces_to_single() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let p = params(
                rng.gen_range(0.0..30.0),
                rng.gen_range(-60.0..60.0),
                rng.gen_range(-60.0..60.0),
                0.0,
            );
            let (s, d) = match (amplitudes_single(&p), amplitudes_double(&p)) {
                (Ok(s), Ok(d)) => (s, d),
                _ => continue,
            };
            for (a, b) in [
                (s.c0e, d.c0e),
                (s.c1g, d.c1g),
                (s.c1e, d.c1e),
                (s.c2g, d.c2g),
            ] {
                assert!(close(a, b, 1e-12), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn decoupled_mode_is_coherent() {
        let p = SystemParams {
            g: 0.0,
            delta: 1.3,
            delta_f: 0.4,
            ..Default::default()
        };
        let a = amplitudes(&p).unwrap();
        let db = Complex64::new(1.3, -0.25);
        // Sign follows from (Δ̄ + Δ_F) C₁g + Ω_m = 0.
        assert!(close(a.c1g, -0.01 / (db + 0.4), 1e-14));
        assert_eq!(a.c0e, Complex64::new(0.0, 0.0));
        assert!(close(
            a.c2g,
            a.c1g * a.c1g / std::f64::consts::SQRT_2,
            1e-13
        ));
        assert!((a.g2().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn factored_form_matches_amplitudes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let lambda = if rng.gen_bool(0.5) {
                0.0
            } else {
                rng.gen_range(0.1..6.0)
            };
            let p = params(
                rng.gen_range(0.5..20.0),
                rng.gen_range(-60.0..60.0),
                rng.gen_range(-60.0..60.0),
                lambda,
            );
            if singularity_distance(&p) < 0.5 {
                continue;
            }
            let a = amplitudes(&p).unwrap();
            let direct = a.g2().unwrap();
            let factored = a.factored_g2();
            assert!((direct - factored).abs() <= 1e-9 * direct.max(factored));
        }
    }

    #[test]
    fn magnitudes_match_determinants() {
        let p = params(7.0, -3.5, 12.0, 2.5);
        let Determinants { c, d, .. } = determinants(&p).unwrap();
        let a = amplitudes(&p).unwrap();
        assert!((a.c_sq - c.norm_sqr()).abs() < 1e-10 * a.c_sq);
        assert!((a.d_sq - d.norm_sqr()).abs() < 1e-10 * a.d_sq);
        assert!(a.a_sq >= 0.0 && a.b_sq >= 0.0);
    }

    #[test]
    fn single_umb_point_suppresses_two_magnon_amplitude() {
        let (g, df) = (20.0, 40.0);
        for delta in umb_condition_single(g, df, 0.0).kappa_free.roots {
            let p = SystemParams {
                g,
                kappa: 0.0,
                delta,
                delta_f: df,
                ..Default::default()
            };
            let a = amplitudes(&p).unwrap();
            assert!(a.c2g.norm() < 1e-10 * a.c1g.norm_sqr());
        }
    }

    #[test]
    fn singularities_are_reported() {
        let p = SystemParams {
            g: 3.0,
            kappa: 0.0,
            delta: 5.0,
            delta_f: 4.0,
            ..Default::default()
        };
        assert!(matches!(
            amplitudes(&p),
            Err(Error::AnalyticSingularity { quantity: "C", .. })
        ));
        let no_drive = SystemParams {
            omega_m: 0.0,
            ..Default::default()
        };
        assert!(amplitudes(&no_drive).is_err());
        // λ g = Δ − Δ_F at κ = 0 makes C₁g vanish.
        let dark = SystemParams {
            g: 2.0,
            kappa: 0.0,
            delta: 7.0,
            delta_f: 1.0,
            omega_m: 0.01,
            omega_nv: 0.03,
            n_th: 0.0,
        };
        assert!(matches!(
            g2_analytic(&dark),
            Err(Error::AnalyticSingularity {
                quantity: "C1g",
                ..
            })
        ));
    }

    #[test]
    fn headline_point_is_deeply_antibunched() {
        let v = g2_analytic(&params(20.0, 22.8, 11.2, 4.0)).unwrap();
        assert!(v > 1e-10 && v < 1e-6, "{v}");
    }

    #[test]
    fn drive_scale_invariance() {
        let p = params(20.0, 17.0, -5.0, 4.0);
        let base = g2_analytic(&p).unwrap();
        for c in [0.1, 3.0, 50.0] {
            let q = SystemParams {
                omega_m: p.omega_m * c,
                omega_nv: p.omega_nv * c,
                ..p
            };
            assert!((g2_analytic(&q).unwrap() - base).abs() < 1e-12 * base);
        }
    }

    #[test]
    fn cmb_roots() {
        assert_eq!(cmb_condition(20.0, 0.0).roots, vec![-20.0, 20.0]);
        let r = cmb_condition(20.0, 11.2).roots;
        assert!((r[1] - 22.92).abs() < 5e-3 && r[0] == -r[1]);
        assert_eq!(cmb_condition(0.0, 5.0).roots, vec![-5.0, 5.0]);
        let z = cmb_condition(0.0, 0.0);
        assert_eq!((z.roots, z.regime), (vec![0.0], Regime::Degenerate));
        for df in [-50.0, -3.0, 0.0, 17.5] {
            for r in cmb_condition(20.0, df).roots {
                assert!((400.0 + df * df - r * r).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn umb_single_roots() {
        let s = umb_condition_single(20.0, 40.0, 0.5);
        assert_eq!(s.kappa_free.regime, Regime::RealPair);
        let r = &s.kappa_free.roots;
        assert!((r[0] - 5.858).abs() < 1e-3 && (r[1] - 34.142).abs() < 1e-3);
        let none = umb_condition_single(20.0, 0.0, 0.5);
        assert!(none.kappa_free.roots.is_empty());
        assert_eq!(none.kappa_free.regime, Regime::NoRealSolution);

        let weak = umb_condition_single(0.5, 0.0, 0.5);
        assert_eq!(weak.finite_kappa.len(), 2);
        assert!((weak.finite_kappa[1].delta - 0.25).abs() < 1e-15);
        assert!((weak.finite_kappa[1].delta_f - 0.5).abs() < 1e-15);
        assert!((weak.finite_kappa[0].delta + 0.25).abs() < 1e-15);
        assert!(umb_condition_single(0.3, 0.0, 0.5).finite_kappa.is_empty());
        // The finite-κ locus is an exact zero of |B₁|².
        for pt in weak.finite_kappa {
            assert!(b_sq(0.5, 0.5, 0.0, pt.delta, pt.delta_f) < 1e-24);
        }
    }

    #[test]
    fn umb_double_roots() {
        let s = umb_condition_double(20.0, 11.2, 4.0);
        assert!((s.roots[0] - 22.93).abs() < 5e-3);
        assert!((s.roots[1] - 148.27).abs() < 5e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let g = rng.gen_range(0.0..20.0);
            let df = rng.gen_range(-60.0..60.0);
            let lambda = rng.gen_range(0.0..6.0);
            let s = umb_condition_double(g, df, lambda);
            assert!(s.roots.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(s.roots.is_empty(), s.regime == Regime::NoRealSolution);
            for r in &s.roots {
                let scale = (1.0 + r * r + df * df + g * g).powi(2);
                assert!(b_sq(g, 0.0, lambda, *r, df) < 1e-9 * scale.max(1.0));
            }
            assert_eq!(
                umb_condition_double(g, df, 0.0),
                umb_condition_single(g, df, 0.0).kappa_free
            );
        }
        let big = umb_condition_double(20.0, 5000.0, 4.0);
        assert!(big.roots[0].abs() < 1.0);
        assert!((big.roots[1] - (5000.0 + 160.0)).abs() < 1.0);
    }

    #[test]
    fn intersections() {
        let pts = intersection_points(20.0, 4.0);
        assert!(pts.iter().all(|p| p.exists));
        assert!((pts[2].delta_f.unwrap() - 11.21).abs() < 0.01);
        assert!((pts[0].delta_f.unwrap() + 37.5).abs() < 1e-12);

        let one = intersection_points(20.0, 1.0);
        assert_eq!(one[0].delta_f, Some(0.0));
        assert!((one[0].delta.unwrap() - 20.0).abs() < 1e-12);
        assert!(!one[1].exists && !one[2].exists);
        assert_eq!(one[1].delta_f, None);

        let lam = 2.0 * std::f64::consts::SQRT_2;
        let t = intersection_points(20.0, lam);
        assert!(!t[1].exists);
        let merged = -20.0 * lam / 8.0;
        assert!((t[1].delta_f.unwrap() - merged).abs() < 1e-6);
        assert!((t[2].delta_f.unwrap() - merged).abs() < 1e-6);
    }

    #[test]
    fn intersection_lies_on_both_loci() {
        for lambda in [3.0, 4.0, 5.0] {
            for pt in intersection_points(20.0, lambda) {
                let df = pt.delta_f.unwrap();
                let lower = umb_condition_double(20.0, df, lambda).roots[0];
                let cmb = cmb_condition(20.0, df).roots;
                assert!(cmb.iter().any(|r| (r - lower).abs() < 1e-9), "λ={lambda}");
                assert!((pt.delta.unwrap() - lower).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn singularity_distance_zeroes() {
        let p = params(20.0, 20.0, 0.0, 0.0);
        assert_eq!(singularity_distance(&p), 0.0);
        let p = params(20.0, 20.0 * (2.0f64).sqrt() / 2.0 + 0.3, 0.0, 0.0);
        assert!((singularity_distance(&p) - 0.3).abs() < 1e-12);
        let p = params(20.0, 85.0, 5.0, 4.0);
        assert!((singularity_distance(&p) - 0.0).abs() < 1e-12);
    }
}
