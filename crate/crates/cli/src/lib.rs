//! `magblock`: single-point queries, scans and blockade conditions.

pub mod error;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use magnon_blockade::analytic::{
    cmb_condition, g2_analytic, intersection_points, umb_condition_double, umb_condition_single,
    ConditionSolution, Regime,
};
use magnon_blockade::correlations::{g2_zero, occupation};
use magnon_blockade::liouvillian::{build_liouvillian, steady_state};
use magnon_blockade::model::{field_to_detunings, PhysicalFieldParams};
use magnon_blockade::scan::{
    clamped_log10, g2t_trace, scan_g2_grid, scan_g2_line, thermal_scan, Axis, ScanGrid,
};
use magnon_blockade::{Error as CoreError, HilbertSpec, SystemParams};
use serde_json::{json, Value};

pub use error::CliError;
use output::{num, Format};

pub const WORKERS_ENV: &str = "MAGBLOCK_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "magblock",
    version,
    about = "Magnon blockade statistics; all rates in units of γ"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steady-state g²(0) and occupations at one parameter set.
    Point(PointArgs),
    /// g²(0) over a (Δ, Δ_F) grid.
    Scan(ScanArgs),
    /// g²(0) along Δ for a list of Δ_F values.
    Line(LineArgs),
    /// g²(0) versus thermal occupation at fixed (Δ, Δ_F).
    Thermal(ThermalArgs),
    /// Delayed correlation g²(t) from the steady state.
    G2t(G2tArgs),
    /// Blockade conditions and intersection points.
    Conditions(ConditionsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Spin-magnon coupling g.
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    pub g: f64,
    /// Decay rate κ.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub kappa: f64,
    /// Magnon drive Ω_m.
    #[arg(
        long = "omega-m",
        default_value_t = 0.01,
        allow_negative_numbers = true
    )]
    pub omega_m: f64,
    /// Drive ratio λ = Ω_NV/Ω_m.
    #[arg(long, conflicts_with = "omega_nv", allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Qubit drive Ω_NV.
    #[arg(long = "omega-nv", allow_negative_numbers = true)]
    pub omega_nv: Option<f64>,
    /// Fock-space cutoff.
    #[arg(long = "n-max", default_value_t = 6)]
    pub n_max: usize,
}

impl ModelArgs {
    fn params(&self, delta: f64, delta_f: f64, n_th: f64) -> Result<SystemParams, CliError> {
        let mut p = SystemParams {
            g: self.g,
            kappa: self.kappa,
            delta,
            delta_f,
            omega_m: self.omega_m,
            omega_nv: self.omega_nv.unwrap_or(0.0),
            n_th,
        };
        if let Some(lambda) = self.lambda {
            p = p.with_lambda(lambda)?;
        }
        p.validate()?;
        HilbertSpec::new(self.n_max)?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Args)]
pub struct DetuningArgs {
    /// Driving detuning Δ.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta: f64,
    #[command(flatten)]
    pub delta_f: DeltaFArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DeltaFArgs {
    /// Frequency detuning Δ_F.
    #[arg(
        long = "delta-f",
        allow_negative_numbers = true,
        conflicts_with = "b_z"
    )]
    pub delta_f: Option<f64>,
    /// Static field in tesla; sets Δ_F from the NV and Kittel-mode frequencies.
    #[arg(long = "b-z")]
    pub b_z: Option<f64>,
}

impl DeltaFArgs {
    fn resolve(&self) -> Result<f64, CliError> {
        match self.b_z {
            Some(b_z) => {
                let field = PhysicalFieldParams::new(b_z);
                field.validate()?;
                Ok(field_to_detunings(&field).delta_f_in_gamma())
            }
            None => Ok(self.delta_f.unwrap_or(0.0)),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
}

#[derive(Debug, Clone, Args)]
pub struct WorkerArgs {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, env = WORKERS_ENV)]
    pub workers: Option<usize>,
}

impl WorkerArgs {
    fn count(&self) -> usize {
        self.workers.unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub detuning: DetuningArgs,
    /// Thermal magnon occupation.
    #[arg(long = "n-th", default_value_t = 0.0, allow_negative_numbers = true)]
    pub n_th: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Δ axis as min:max:count.
    #[arg(long, default_value = "-60:60:201", allow_hyphen_values = true)]
    pub delta: String,
    /// Δ_F axis as min:max:count.
    #[arg(
        long = "delta-f",
        default_value = "-60:60:201",
        allow_hyphen_values = true
    )]
    pub delta_f: String,
    #[arg(long = "n-th", default_value_t = 0.0, allow_negative_numbers = true)]
    pub n_th: f64,
    /// Leave the analytic column empty.
    #[arg(long = "no-analytic")]
    pub no_analytic: bool,
    #[command(flatten)]
    pub workers: WorkerArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct LineArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Δ axis as min:max:count.
    #[arg(long, default_value = "-60:60:601", allow_hyphen_values = true)]
    pub delta: String,
    /// Comma-separated Δ_F values.
    #[arg(long = "delta-f", value_delimiter = ',', allow_negative_numbers = true, num_args = 0..)]
    pub delta_f: Vec<f64>,
    #[arg(long = "n-th", default_value_t = 0.0, allow_negative_numbers = true)]
    pub n_th: f64,
    #[arg(long = "no-analytic")]
    pub no_analytic: bool,
    #[command(flatten)]
    pub workers: WorkerArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ThermalArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub detuning: DetuningArgs,
    /// Comma-separated thermal occupations.
    #[arg(
        long = "n-th-values",
        value_delimiter = ',',
        default_value = "0,1e-4,1e-3,1e-2,0.1,1",
        allow_negative_numbers = true
    )]
    pub n_th_values: Vec<f64>,
    #[command(flatten)]
    pub workers: WorkerArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct G2tArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub detuning: DetuningArgs,
    #[arg(long = "n-th", default_value_t = 0.0, allow_negative_numbers = true)]
    pub n_th: f64,
    /// Delay grid as min:max:count, in units of 1/γ.
    #[arg(long, default_value = "0:10:501", allow_hyphen_values = true)]
    pub t: String,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ConditionsArgs {
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    pub g: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub lambda: f64,
    #[command(flatten)]
    pub delta_f: DeltaFArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

fn parse_axis(flag: &str, s: &str) -> Result<Axis, CliError> {
    s.parse::<Axis>()
        .map_err(|e| CliError::Usage(format!("--{flag}: {e}")))
}

/// Writes the whole output at once; file targets go through a temporary file
/// in the same directory and are renamed into place.
fn emit(target: &Option<PathBuf>, stdout: &mut dyn Write, bytes: &[u8]) -> Result<(), CliError> {
    match target {
        None => stdout.write_all(bytes).map_err(CliError::Stdout),
        Some(path) => write_atomic(path, bytes),
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn cmd_point(a: &PointArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let p = a
        .model
        .params(a.detuning.delta, a.detuning.delta_f.resolve()?, a.n_th)?;
    let spec = HilbertSpec::new(a.model.n_max)?;
    let rho = steady_state(&build_liouvillian(&p, spec)?)?;
    let occ = occupation(&rho, spec)?;
    let g2 = match g2_zero(&rho, spec) {
        Ok(v) => Some(v),
        Err(CoreError::VacuumDominated { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let analytic = g2_analytic(&p).ok();
    let meta = json!({
        "command": "point",
        "params": p,
        "lambda": p.lambda(),
        "n_max": a.model.n_max,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let mut buf = Vec::new();
    let undefined = |x: Option<f64>| x.map_or_else(|| output::UNDEFINED.to_string(), num);
    match Format::from(a.out.format) {
        Format::Csv => {
            output::write_preamble(&mut buf, &meta).map_err(CliError::Stdout)?;
            writeln!(buf, "{}", output::SINGLE_POINT_HEADER).map_err(CliError::Stdout)?;
            writeln!(
                buf,
                "{},{},{},{},{},{},{}",
                num(p.delta),
                num(p.delta_f),
                undefined(g2),
                undefined(g2.map(clamped_log10)),
                undefined(analytic),
                num(occ.magnon),
                num(occ.qubit)
            )
            .map_err(CliError::Stdout)?;
        }
        Format::Json => {
            let v = |x: Option<f64>| x.map_or_else(|| Value::from(output::UNDEFINED), Value::from);
            let row = json!({
                "delta": p.delta,
                "delta_f": p.delta_f,
                "g2": v(g2),
                "log10_g2": v(g2.map(clamped_log10)),
                "g2_analytic": v(analytic),
                "n_magnon": occ.magnon,
                "n_qubit": occ.qubit,
            });
            output::write_json(&mut buf, meta, vec![row]).map_err(CliError::Stdout)?;
        }
    }
    emit(&a.out.output, stdout, &buf)
}

fn cmd_scan(a: &ScanArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let grid = ScanGrid {
        delta_axis: parse_axis("delta", &a.delta)?,
        delta_f_axis: parse_axis("delta-f", &a.delta_f)?,
        params: a.model.params(0.0, 0.0, a.n_th)?,
        n_max: a.model.n_max,
        include_analytic: !a.no_analytic,
    };
    let r = scan_g2_grid(&grid, a.workers.count())?;
    let mut buf = Vec::new();
    output::write_points(&mut buf, a.out.format.into(), "scan", &r.meta, &r.rows)
        .map_err(CliError::Stdout)?;
    emit(&a.out.output, stdout, &buf)
}

fn cmd_line(a: &LineArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let axis = parse_axis("delta", &a.delta)?;
    let p = a.model.params(0.0, 0.0, a.n_th)?;
    let r = scan_g2_line(
        &p,
        axis,
        &a.delta_f,
        a.model.n_max,
        !a.no_analytic,
        a.workers.count(),
    )?;
    let mut buf = Vec::new();
    output::write_points(&mut buf, a.out.format.into(), "line", &r.meta, &r.rows)
        .map_err(CliError::Stdout)?;
    emit(&a.out.output, stdout, &buf)
}

fn cmd_thermal(a: &ThermalArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let p = a
        .model
        .params(a.detuning.delta, a.detuning.delta_f.resolve()?, 0.0)?;
    let r = thermal_scan(&p, &a.n_th_values, a.model.n_max, a.workers.count())?;
    let mut buf = Vec::new();
    output::write_thermal(&mut buf, a.out.format.into(), &r.meta, &r.rows)
        .map_err(CliError::Stdout)?;
    emit(&a.out.output, stdout, &buf)
}

fn cmd_g2t(a: &G2tArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let times = parse_axis("t", &a.t)?.values();
    let p = a
        .model
        .params(a.detuning.delta, a.detuning.delta_f.resolve()?, a.n_th)?;
    let r = g2t_trace(&p, a.model.n_max, &times)?;
    let mut buf = Vec::new();
    output::write_trace(&mut buf, a.out.format.into(), &r.meta, &r.rows)
        .map_err(CliError::Stdout)?;
    emit(&a.out.output, stdout, &buf)
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::RealPair => "real_pair",
        Regime::Degenerate => "degenerate",
        Regime::NoRealSolution => "no_real_solution",
    }
}

fn invalid(name: &'static str, value: f64, reason: &'static str) -> CliError {
    CliError::Invalid(CoreError::InvalidParameter {
        name,
        value,
        reason,
    })
}

fn cmd_conditions(a: &ConditionsArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    for (name, v) in [("g", a.g), ("kappa", a.kappa), ("lambda", a.lambda)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(invalid(name, v, "must be finite and non-negative"));
        }
    }
    let delta_f = a.delta_f.resolve()?;
    if !delta_f.is_finite() {
        return Err(invalid("delta_f", delta_f, "must be finite"));
    }
    let cmb = cmb_condition(a.g, delta_f);
    let umb = umb_condition_single(a.g, delta_f, a.kappa);
    let umb2 = umb_condition_double(a.g, delta_f, a.lambda);
    let crossings = if a.g > 0.0 && a.lambda > 0.0 {
        intersection_points(a.g, a.lambda)
    } else {
        Vec::new()
    };

    let mut meta = json!({
        "command": "conditions",
        "g": a.g,
        "kappa": a.kappa,
        "lambda": a.lambda,
        "delta_f": delta_f,
        "version": env!("CARGO_PKG_VERSION"),
    });
    if let Some(b_z) = a.delta_f.b_z {
        let field = PhysicalFieldParams::new(b_z);
        meta["b_z"] = json!(b_z);
        meta["resonance_field"] = json!(field.resonance_field());
    }

    let mut buf = Vec::new();
    match Format::from(a.out.format) {
        Format::Csv => {
            let w = &mut buf;
            output::write_preamble(w, &meta).map_err(CliError::Stdout)?;
            let mut lines = vec!["condition,index,delta_f,delta,exists,regime".to_string()];
            let mut roots = |name: &str, s: &ConditionSolution| {
                if s.roots.is_empty() {
                    lines.push(format!(
                        "{name},,{},,false,{}",
                        num(delta_f),
                        regime_name(s.regime)
                    ));
                }
                for (i, r) in s.roots.iter().enumerate() {
                    lines.push(format!(
                        "{name},{},{},{},true,{}",
                        i + 1,
                        num(delta_f),
                        num(*r),
                        regime_name(s.regime)
                    ));
                }
            };
            roots("cmb", &cmb);
            roots("umb_single", &umb.kappa_free);
            roots("umb_double", &umb2);
            for (i, pt) in umb.finite_kappa.iter().enumerate() {
                lines.push(format!(
                    "umb_single_finite_kappa,{},{},{},true,",
                    i + 1,
                    num(pt.delta_f),
                    num(pt.delta)
                ));
            }
            for pt in &crossings {
                let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
                lines.push(format!(
                    "intersection,{},{},{},{},",
                    pt.index,
                    opt(pt.delta_f),
                    opt(pt.delta),
                    pt.exists
                ));
            }
            for l in lines {
                writeln!(w, "{l}").map_err(CliError::Stdout)?;
            }
        }
        Format::Json => {
            let doc = json!({
                "meta": meta,
                "cmb": cmb,
                "umb_single": umb,
                "umb_double": umb2,
                "intersections": crossings,
            });
            serde_json::to_writer_pretty(&mut buf, &doc).map_err(|e| CliError::Stdout(e.into()))?;
            buf.push(b'\n');
        }
    }
    emit(&a.out.output, stdout, &buf)
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Point(a) => cmd_point(a, stdout),
        Command::Scan(a) => cmd_scan(a, stdout),
        Command::Line(a) => cmd_line(a, stdout),
        Command::Thermal(a) => cmd_thermal(a, stdout),
        Command::G2t(a) => cmd_g2t(a, stdout),
        Command::Conditions(a) => cmd_conditions(a, stdout),
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{rendered}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{rendered}");
                    1
                }
            };
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
