//! Parameter sweeps over (Δ, Δ_F), thermal occupations and delay times.
//!
//! Points are evaluated independently on a fixed-size worker pool and
//! collected by index, so the row order and every value are independent of
//! the number of workers.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::g2_analytic;
use crate::correlations::{g2_tau_from, g2_zero, occupation, VACUUM_FLOOR};
use crate::error::{Error, Result};
use crate::evolve::EvolveOptions;
use crate::liouvillian::{build_liouvillian, steady_state, STEADY_STATE_TOL};
use crate::model::SystemParams;
use crate::operators::HilbertSpec;

/// Floor applied before taking `log10(g²)`.
pub const LOG10_FLOOR: f64 = 1e-12;

pub fn clamped_log10(x: f64) -> f64 {
    x.max(LOG10_FLOOR).log10()
}

/// Evenly spaced samples `min + (max − min) i / (count − 1)`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        let axis = Self { min, max, count };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "axis bounds must be finite, got {}:{}",
                self.min, self.max
            )));
        }
        if self.min >= self.max {
            return Err(Error::InvalidGrid(format!(
                "axis requires min < max, got {}:{}",
                self.min, self.max
            )));
        }
        if self.count < 2 {
            return Err(Error::InvalidGrid(format!(
                "axis requires at least 2 points, got {}",
                self.count
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.max
                } else {
                    self.min + step * i as f64
                }
            })
            .collect()
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.count)
    }
}

/// Parses `min:max:count`.
impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidGrid(format!("expected min:max:count, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let min = parts[0].trim().parse::<f64>().map_err(|_| bad())?;
        let max = parts[1].trim().parse::<f64>().map_err(|_| bad())?;
        let count = parts[2].trim().parse::<usize>().map_err(|_| bad())?;
        Self::new(min, max, count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub delta_axis: Axis,
    pub delta_f_axis: Axis,
    /// Template; its `delta` and `delta_f` are overwritten per point.
    pub params: SystemParams,
    pub n_max: usize,
    pub include_analytic: bool,
}

impl ScanGrid {
    pub fn validate(&self) -> Result<()> {
        self.delta_axis.validate()?;
        self.delta_f_axis.validate()?;
        HilbertSpec::new(self.n_max)?;
        self.params.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub steady_state_residual: f64,
    pub evolve_rtol: f64,
    pub evolve_atol: f64,
    pub vacuum_floor: f64,
    pub log10_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let opts = EvolveOptions::default();
        Self {
            steady_state_residual: STEADY_STATE_TOL,
            evolve_rtol: opts.rtol,
            evolve_atol: opts.atol,
            vacuum_floor: VACUUM_FLOOR,
            log10_floor: LOG10_FLOOR,
        }
    }
}

/// Sweep geometry echoed into the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScanShape {
    Grid { delta: Axis, delta_f: Axis },
    Line { delta: Axis, delta_f: Vec<f64> },
    Thermal { n_th: Vec<f64> },
    Trace { t: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanMeta {
    pub shape: ScanShape,
    pub params: SystemParams,
    pub n_max: usize,
    pub include_analytic: bool,
    pub tolerances: Tolerances,
    pub workers: usize,
    pub failed_points: usize,
    pub wall_time_s: f64,
    pub version: String,
}

/// One (Δ, Δ_F) evaluation. `None` correlation values are undefined, and
/// `g2_analytic` is also `None` whenever the analytic column is disabled.
#[derive(Debug, Clone, PartialEq)]
pub struct PointRow {
    pub delta: f64,
    pub delta_f: f64,
    pub g2: Option<f64>,
    pub g2_analytic: Option<f64>,
    pub n_magnon: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalRow {
    pub n_th: f64,
    pub g2: Option<f64>,
    pub n_magnon: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub g2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult<R> {
    pub meta: ScanMeta,
    pub rows: Vec<R>,
}

struct Sample {
    g2: Option<f64>,
    n_magnon: Option<f64>,
    error: Option<String>,
}

fn sample(params: &SystemParams, spec: HilbertSpec) -> Sample {
    let rho = match build_liouvillian(params, spec).and_then(|l| steady_state(&l)) {
        Ok(rho) => rho,
        Err(e) => {
            return Sample {
                g2: None,
                n_magnon: None,
                error: Some(e.to_string()),
            }
        }
    };
    let n_magnon = occupation(&rho, spec).ok().map(|o| o.magnon);
    match g2_zero(&rho, spec) {
        Ok(g2) => Sample {
            g2: Some(g2),
            n_magnon,
            error: None,
        },
        Err(e) => Sample {
            g2: None,
            n_magnon,
            error: Some(e.to_string()),
        },
    }
}

/// Single-threaded steady-state evaluation at one parameter set.
pub fn evaluate_point(
    params: &SystemParams,
    spec: HilbertSpec,
    include_analytic: bool,
) -> PointRow {
    let s = sample(params, spec);
    PointRow {
        delta: params.delta,
        delta_f: params.delta_f,
        g2: s.g2,
        g2_analytic: if include_analytic {
            g2_analytic(params).ok()
        } else {
            None
        },
        n_magnon: s.n_magnon,
        error: s.error,
    }
}

fn run_parallel<T, R, F>(items: &[T], workers: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if workers == 0 {
        return Err(Error::InvalidGrid("worker count must be at least 1".into()));
    }
    if workers == 1 {
        return Ok(items.iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidGrid(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}

fn meta(
    shape: ScanShape,
    params: SystemParams,
    n_max: usize,
    include_analytic: bool,
    workers: usize,
    failed_points: usize,
    started: Instant,
) -> ScanMeta {
    ScanMeta {
        shape,
        params,
        n_max,
        include_analytic,
        tolerances: Tolerances::default(),
        workers,
        failed_points,
        wall_time_s: started.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

fn scan_points(
    points: Vec<(f64, f64)>,
    shape: ScanShape,
    params: SystemParams,
    n_max: usize,
    include_analytic: bool,
    workers: usize,
    started: Instant,
) -> Result<ScanResult<PointRow>> {
    let spec = HilbertSpec::new(n_max)?;
    let rows = run_parallel(&points, workers, |&(delta_f, delta)| {
        evaluate_point(
            &params.with_detunings(delta, delta_f),
            spec,
            include_analytic,
        )
    })?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    Ok(ScanResult {
        meta: meta(
            shape,
            params,
            n_max,
            include_analytic,
            workers,
            failed,
            started,
        ),
        rows,
    })
}

/// Steady-state `g²(0)` over the grid, rows ordered Δ_F-major then Δ ascending.
pub fn scan_g2_grid(grid: &ScanGrid, workers: usize) -> Result<ScanResult<PointRow>> {
    let started = Instant::now();
    grid.validate()?;
    let deltas = grid.delta_axis.values();
    let points = grid
        .delta_f_axis
        .values()
        .into_iter()
        .flat_map(|df| deltas.iter().map(move |&d| (df, d)))
        .collect();
    let shape = ScanShape::Grid {
        delta: grid.delta_axis,
        delta_f: grid.delta_f_axis,
    };
    scan_points(
        points,
        shape,
        grid.params,
        grid.n_max,
        grid.include_analytic,
        workers,
        started,
    )
}

/// A Δ sweep for each listed Δ_F, in the order given.
pub fn scan_g2_line(
    params: &SystemParams,
    delta_axis: Axis,
    delta_f_values: &[f64],
    n_max: usize,
    include_analytic: bool,
    workers: usize,
) -> Result<ScanResult<PointRow>> {
    let started = Instant::now();
    delta_axis.validate()?;
    params.validate()?;
    if let Some(bad) = delta_f_values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "delta_f value {bad} is not finite"
        )));
    }
    let deltas = delta_axis.values();
    let points = delta_f_values
        .iter()
        .flat_map(|&df| deltas.iter().map(move |&d| (df, d)))
        .collect();
    let shape = ScanShape::Line {
        delta: delta_axis,
        delta_f: delta_f_values.to_vec(),
    };
    scan_points(
        points,
        shape,
        *params,
        n_max,
        include_analytic,
        workers,
        started,
    )
}

/// `g²(0)` at the template's (Δ, Δ_F) for each thermal occupation.
pub fn thermal_scan(
    params: &SystemParams,
    n_th_values: &[f64],
    n_max: usize,
    workers: usize,
) -> Result<ScanResult<ThermalRow>> {
    let started = Instant::now();
    params.validate()?;
    let spec = HilbertSpec::new(n_max)?;
    if let Some(bad) = n_th_values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidParameter {
            name: "n_th",
            value: *bad,
            reason: "must be finite and non-negative",
        });
    }
    let rows = run_parallel(n_th_values, workers, |&n_th| {
        let s = sample(&params.with_n_th(n_th), spec);
        ThermalRow {
            n_th,
            g2: s.g2,
            n_magnon: s.n_magnon,
            error: s.error,
        }
    })?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    let shape = ScanShape::Thermal {
        n_th: n_th_values.to_vec(),
    };
    Ok(ScanResult {
        meta: meta(shape, *params, n_max, false, workers, failed, started),
        rows,
    })
}

/// `g²(t)` from the steady state; times in units of 1/γ.
pub fn g2t_trace(
    params: &SystemParams,
    n_max: usize,
    times: &[f64],
) -> Result<ScanResult<TraceRow>> {
    let started = Instant::now();
    params.validate()?;
    let spec = HilbertSpec::new(n_max)?;
    let l = build_liouvillian(params, spec)?;
    let rho = steady_state(&l)?;
    let values = g2_tau_from(&l, &rho, spec, times, EvolveOptions::default())?;
    let rows = times
        .iter()
        .zip(values)
        .map(|(&t, g2)| TraceRow { t, g2 })
        .collect();
    let shape = ScanShape::Trace { t: times.to_vec() };
    Ok(ScanResult {
        meta: meta(shape, *params, n_max, false, 1, 0, started),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_values_and_parsing() {
        let a: Axis = "-1:1:5".parse().unwrap();
        assert_eq!(a.values(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(a.to_string().parse::<Axis>().unwrap(), a);
        for bad in ["1:1:3", "0:1:1", "0:1", "a:1:3", "0:1:-2", "0:inf:3"] {
            assert!(bad.parse::<Axis>().is_err(), "{bad}");
        }
        let long = Axis::new(-60.0, 60.0, 201).unwrap();
        let v = long.values();
        assert_eq!((v[0], v[100], v[200]), (-60.0, 0.0, 60.0));
    }

    #[test]
    fn two_by_two_grid_order() {
        let grid = ScanGrid {
            delta_axis: Axis::new(-1.0, 1.0, 2).unwrap(),
            delta_f_axis: Axis::new(0.0, 2.0, 2).unwrap(),
            params: SystemParams {
                g: 1.0,
                ..Default::default()
            },
            n_max: 3,
            include_analytic: true,
        };
        let r = scan_g2_grid(&grid, 1).unwrap();
        let coords: Vec<_> = r.rows.iter().map(|p| (p.delta_f, p.delta)).collect();
        assert_eq!(
            coords,
            vec![(0.0, -1.0), (0.0, 1.0), (2.0, -1.0), (2.0, 1.0)]
        );
        assert!(r
            .rows
            .iter()
            .all(|p| p.g2.is_some() && p.g2_analytic.is_some()));
        assert_eq!(r.meta.failed_points, 0);
    }

    #[test]
    fn undriven_point_is_undefined_not_zero() {
        let p = SystemParams {
            omega_m: 0.0,
            ..Default::default()
        };
        let row = evaluate_point(&p, HilbertSpec::new(3).unwrap(), true);
        assert_eq!(row.g2, None);
        assert_eq!(row.g2_analytic, None);
        assert_eq!(row.n_magnon, Some(0.0));
        assert!(row.error.is_some());
    }

    #[test]
    fn empty_line_scan() {
        let r = scan_g2_line(
            &SystemParams::default(),
            Axis::new(-1.0, 1.0, 3).unwrap(),
            &[],
            4,
            false,
            2,
        )
        .unwrap();
        assert!(r.rows.is_empty());
        assert_eq!(r.meta.n_max, 4);
    }

    #[test]
    fn invalid_inputs() {
        let grid = ScanGrid {
            delta_axis: Axis {
                min: 1.0,
                max: 0.0,
                count: 3,
            },
            delta_f_axis: Axis::new(0.0, 1.0, 2).unwrap(),
            params: SystemParams::default(),
            n_max: 3,
            include_analytic: false,
        };
        assert!(matches!(scan_g2_grid(&grid, 1), Err(Error::InvalidGrid(_))));
        let ok = ScanGrid {
            delta_axis: Axis::new(0.0, 1.0, 2).unwrap(),
            ..grid
        };
        assert!(scan_g2_grid(&ok, 0).is_err());
        assert!(thermal_scan(&SystemParams::default(), &[-1.0], 3, 1).is_err());
    }

    #[test]
    fn thermal_zero_matches_point() {
        let p = SystemParams {
            delta: 3.0,
            delta_f: 1.0,
            g: 2.0,
            ..Default::default()
        };
        let spec = HilbertSpec::new(5).unwrap();
        let t = thermal_scan(&p, &[0.0, 0.01], 5, 2).unwrap();
        assert_eq!(t.rows[0].g2, evaluate_point(&p, spec, false).g2);
        assert!(t.rows[1].g2.unwrap() > t.rows[0].g2.unwrap());
    }

    #[test]
    fn clamped_log() {
        assert_eq!(clamped_log10(0.0), -12.0);
        assert_eq!(clamped_log10(100.0), 2.0);
    }
}
