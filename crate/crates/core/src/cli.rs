//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 model or data error. Nothing is
//! written to the output when a command fails.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::acf::acf_grid;
use crate::error::{Error, Result};
use crate::estimate::{recover_from_grid, AcfSource, MomentEstimate};
use crate::export;
use crate::ma::psi_table;
use crate::params::{check_conditions, equivalence_class, ConditionReport, ParamSet};
use crate::sim::{empirical_acf, simulate_stationary, Noise, SimMethod, SimOptions};
use crate::spectral::{acf_quadrature_window, density_grid, QuadratureSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;

pub const THREADS_ENV: &str = "PLANAR_AR_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "planar-ar",
    version,
    about = "First-order planar autoregressive fields",
    allow_negative_numbers = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(short = 'a', allow_negative_numbers = true, default_value_t = 0.0)]
    pub a: f64,
    #[arg(short = 'b', allow_negative_numbers = true, default_value_t = 0.0)]
    pub b: f64,
    #[arg(short = 'c', allow_negative_numbers = true, default_value_t = 0.0)]
    pub c: f64,
    /// Innovation variance.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub sigma2: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<ParamSet> {
        ParamSet::new(self.a, self.b, self.c, self.sigma2)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file (atomically) instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pgm,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Truncated moving-average convolution.
    Ma,
    /// Recursion from a zero boundary with burn-in.
    Recursion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseArg {
    Gaussian,
    Uniform,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stationarity and causality conditions.
    Check {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Autocovariance over a lag window.
    Acf {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = -3, allow_negative_numbers = true)]
        h1_min: i64,
        #[arg(long, default_value_t = 3, allow_negative_numbers = true)]
        h1_max: i64,
        #[arg(long, default_value_t = -3, allow_negative_numbers = true)]
        h2_min: i64,
        #[arg(long, default_value_t = 3, allow_negative_numbers = true)]
        h2_max: i64,
        /// Add spectral quadrature values and differences.
        #[arg(long)]
        oracle: bool,
        /// Quadrature nodes per axis for --oracle.
        #[arg(long, default_value_t = 2048)]
        nodes: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Moving-average coefficients.
    Psi {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 8)]
        kmax: usize,
        #[arg(long, default_value_t = 8)]
        lmax: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Simulate a stationary field.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// Square field size; overridden by --rows/--cols.
        #[arg(long, default_value_t = 128)]
        size: usize,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        cols: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = MethodArg::Recursion)]
        method: MethodArg,
        #[arg(long, value_enum, default_value_t = NoiseArg::Gaussian)]
        noise: NoiseArg,
        /// Target MA tail mass for truncation and burn-in.
        #[arg(long, default_value_t = 1e-8, allow_negative_numbers = true)]
        tol: f64,
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long, default_value_t = 1024)]
        max_order: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Recover parameters from an autocovariance grid or a field (CSV or JSON).
    Estimate {
        input: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Parameter sets sharing the same autocovariance.
    Equiv {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Spectral density on a frequency grid.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome = std::result::Result<(String, i32), Failure>;

pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    if let Err(msg) = configure_threads() {
        let _ = writeln!(err, "error: {msg}");
        return EXIT_USAGE;
    }
    let out_path = output_of(&cli.command).out.clone();
    match execute(&cli.command) {
        Ok((text, code)) => match emit(&text, out_path.as_deref(), out) {
            Ok(()) => code,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_DOMAIN
            }
        },
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Domain(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DOMAIN
        }
    }
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got '{raw}'"))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn emit(text: &str, path: Option<&Path>, out: &mut impl Write) -> std::io::Result<()> {
    match path {
        None => out.write_all(text.as_bytes()),
        Some(p) => {
            let dir = p
                .parent()
                .filter(|d| !d.as_os_str().is_empty())
                .unwrap_or(Path::new("."));
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(text.as_bytes())?;
            tmp.as_file().sync_all()?;
            tmp.persist(p).map_err(|e| e.error)?;
            Ok(())
        }
    }
}

fn output_of(c: &Command) -> &OutputArgs {
    match c {
        Command::Check { output, .. }
        | Command::Acf { output, .. }
        | Command::Psi { output, .. }
        | Command::Simulate { output, .. }
        | Command::Estimate { output, .. }
        | Command::Equiv { output, .. }
        | Command::Spectrum { output, .. } => output,
    }
}

fn pick(
    requested: Option<Format>,
    default: Format,
    allowed: &[Format],
) -> std::result::Result<Format, Failure> {
    let f = requested.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(Failure::Usage(
            format!("format {f:?} is not available for this command").to_lowercase(),
        ))
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn execute(cmd: &Command) -> Outcome {
    use Format::*;
    match cmd {
        Command::Check { model, output } => {
            let f = pick(output.format, Table, &[Json, Table])?;
            let p = model.params()?;
            let r = check_conditions(&p)?;
            let code = if r.stationary { EXIT_OK } else { EXIT_DOMAIN };
            let text = match f {
                Json => pretty(&json!({ "params": p, "conditions": r })),
                _ => check_text(&p, &r),
            };
            Ok((text, code))
        }
        Command::Acf {
            model,
            h1_min,
            h1_max,
            h2_min,
            h2_max,
            oracle,
            nodes,
            output,
        } => {
            let f = pick(output.format, Csv, &[Json, Csv, Table])?;
            if h1_min > h1_max || h2_min > h2_max {
                return Err(Failure::Usage("lag window bounds are reversed".into()));
            }
            let p = model.params()?;
            let g = acf_grid(&p, *h1_min, *h1_max, *h2_min, *h2_max)?;
            let q = if *oracle {
                let spec = QuadratureSpec::trapezoid(*nodes);
                Some(acf_quadrature_window(
                    &p, *h1_min, *h1_max, *h2_min, *h2_max, &spec,
                )?)
            } else {
                None
            };
            let text = match (f, &q) {
                (Json, None) => pretty(&export::acf_json(&g)),
                (Json, Some(q)) => pretty(&export::acf_json_with_oracle(&g, q)),
                (Csv, None) => export::acf_csv(&g),
                (Csv, Some(q)) => export::acf_csv_with_oracle(&g, q),
                (_, None) => export::acf_table(&g),
                (_, Some(q)) => {
                    let diff = g.max_abs_diff(q).unwrap_or(f64::NAN);
                    format!(
                        "{}max |closed form - quadrature| = {}\n",
                        export::acf_table(&g),
                        export::num6(diff)
                    )
                }
            };
            Ok((text, EXIT_OK))
        }
        Command::Psi {
            model,
            kmax,
            lmax,
            output,
        } => {
            let f = pick(output.format, Csv, &[Json, Csv, Table])?;
            let t = psi_table(&model.params()?, *kmax, *lmax)?;
            let text = match f {
                Json => pretty(&export::psi_json(&t)),
                Csv => export::psi_csv(&t),
                _ => export::psi_table_text(&t),
            };
            Ok((text, EXIT_OK))
        }
        Command::Simulate {
            model,
            size,
            rows,
            cols,
            seed,
            method,
            noise,
            tol,
            burn_in,
            max_order,
            output,
        } => {
            let f = pick(output.format, Pgm, &[Json, Csv, Pgm])?;
            let (r, c) = (rows.unwrap_or(*size), cols.unwrap_or(*size));
            if r == 0 || c == 0 {
                return Err(Failure::Usage("field dimensions must be positive".into()));
            }
            let opts = SimOptions {
                tol: *tol,
                max_order: *max_order,
                burn_in: *burn_in,
                noise: match noise {
                    NoiseArg::Gaussian => Noise::Gaussian,
                    NoiseArg::Uniform => Noise::Uniform,
                },
            };
            let m = match method {
                MethodArg::Ma => SimMethod::CausalMA,
                MethodArg::Recursion => SimMethod::BoundaryRecursion,
            };
            let (g, meta) = simulate_stationary(&model.params()?, r, c, *seed, m, &opts)?;
            let text = match f {
                Json => pretty(&export::field_json(&g, Some(&meta))),
                Csv => export::field_csv(&g),
                _ => export::field_pgm(&g, Some(&meta)),
            };
            Ok((text, EXIT_OK))
        }
        Command::Estimate { input, output } => {
            let f = pick(output.format, Json, &[Json, Table])?;
            let est = estimate_file(input)?;
            let text = match f {
                Json => pretty(&estimate_json(&est)),
                _ => estimate_text(&est),
            };
            Ok((text, EXIT_OK))
        }
        Command::Equiv { model, output } => {
            let f = pick(output.format, Json, &[Json, Table])?;
            let class = equivalence_class(&model.params()?)?;
            let text = match f {
                Json => pretty(&serde_json::to_value(&class).expect("class serializes")),
                _ => {
                    let mut s = format!("class size {}\n", class.class_size);
                    for m in &class.members {
                        let q = &m.params;
                        let mark = if q.is_causal() { "  causal" } else { "" };
                        s += &format!(
                            "{:?}  a={} b={} c={} sigma2={}{mark}\n",
                            m.transform,
                            export::num6(q.a),
                            export::num6(q.b),
                            export::num6(q.c),
                            export::num6(q.sigma2)
                        );
                    }
                    s
                }
            };
            Ok((text, EXIT_OK))
        }
        Command::Spectrum {
            model,
            resolution,
            output,
        } => {
            let f = pick(output.format, Csv, &[Json, Csv])?;
            let rows = density_grid(&model.params()?, *resolution)?;
            let text = match f {
                Json => pretty(&json!({
                    "resolution": resolution,
                    "nu1": rows.iter().map(|r| r.0).collect::<Vec<_>>(),
                    "nu2": rows.iter().map(|r| r.1).collect::<Vec<_>>(),
                    "density": rows.iter().map(|r| r.2).collect::<Vec<_>>(),
                })),
                _ => export::spectrum_csv(&rows),
            };
            Ok((text, EXIT_OK))
        }
    }
}

fn check_text(p: &ParamSet, r: &ConditionReport) -> String {
    let n = export::num6;
    format!(
        "a = {}, b = {}, c = {}, sigma2 = {}\n\
         f1 = {}\nf2 = {}\nf3 = {}\nf4 = {}\nD = {}\n\
         stationary = {}\ncausal = {}\npnd_sufficient = {}\nnear_boundary = {}\nsymmetry = {:?}\n",
        n(p.a),
        n(p.b),
        n(p.c),
        n(p.sigma2),
        n(r.f1),
        n(r.f2),
        n(r.f3),
        n(r.f4),
        n(r.d),
        r.stationary,
        r.causal,
        r.pnd_sufficient,
        r.near_boundary,
        r.symmetry
    )
}

/// Reads an autocovariance grid or a field, telling them apart by CSV header
/// or JSON keys. Fields are reduced to their sample autocovariance first.
pub fn estimate_file(path: &Path) -> Result<MomentEstimate> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let v: Value =
            serde_json::from_str(trimmed).map_err(|e| Error::Input(format!("bad JSON: {e}")))?;
        if v.get("h1_min").is_some() {
            return recover_from_grid(&export::parse_acf_json(&v)?, AcfSource::ExactAcf);
        }
        if v.get("n_rows").is_some() {
            let g = export::parse_field_json(&v)?;
            return recover_from_grid(&empirical_acf(&g, 2, 2)?, AcfSource::EmpiricalAcf);
        }
        return Err(Error::Input(
            "JSON is neither an autocovariance grid nor a field".into(),
        ));
    }
    let header = trimmed.lines().next().unwrap_or("").trim();
    if header.starts_with("h1,h2,gamma") {
        recover_from_grid(&export::parse_acf_csv(&text)?, AcfSource::ExactAcf)
    } else if header == "i,j,x" {
        let g = export::parse_field_csv(&text)?;
        recover_from_grid(&empirical_acf(&g, 2, 2)?, AcfSource::EmpiricalAcf)
    } else {
        Err(Error::Input(format!("unrecognized header '{header}'")))
    }
}

pub fn estimate_json(est: &MomentEstimate) -> Value {
    json!({
        "estimate": {
            "params": est.params,
            "source": est.source,
            "orientation": est.orientation,
            "acf_candidates": est.acf_candidates,
        },
        "equivalence_class": est.equivalence,
        "condition_report": est.condition_report,
        "diagnostics": est.diagnostics,
    })
}

fn estimate_text(est: &MomentEstimate) -> String {
    let n = export::num6;
    let p = &est.params;
    let mut s = format!(
        "a = {}, b = {}, c = {}, sigma2 = {}\nsource = {:?}, orientation = {:?}\nclass size = {}\n",
        n(p.a),
        n(p.b),
        n(p.c),
        n(p.sigma2),
        est.source,
        est.orientation,
        est.equivalence.class_size
    );
    for d in &est.diagnostics {
        s += &format!("yw residual ({}, {}) = {}\n", d.h1, d.h2, n(d.residual));
    }
    s
}
