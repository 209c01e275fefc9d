//! Command-line front end: `toric-height <command> [spec.json] [flags]`.
//!
//! Exit codes: 0 on success, 1 when a verification check fails, 2 on
//! invalid input.

pub mod report;
pub mod spec;

use std::io::Read;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use thiserror::Error;

use crate::arakelov::{MetricFunction, SamplingGrid};
use crate::harness::{
    convergence_study, relative_error, run_suite, HarnessError, KinkRange, SuiteConfig, Tolerances,
};
use crate::pwl::Interval;
use report::{Body, Curve, Format, Report, Settings, VerifyThresholds};
use spec::{MetricSpec, SpecError};

pub use report::emit;
pub use spec::parse_spec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;

pub const DEFAULT_WIDTHS: [f64; 3] = [0.2, 0.1, 0.05];

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Height,
    Chivol,
    Roof,
    Envelope,
    Measure,
    Verify,
    Suite,
    Converge,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Height => "height",
            Command::Chivol => "chivol",
            Command::Roof => "roof",
            Command::Envelope => "envelope",
            Command::Measure => "measure",
            Command::Verify => "verify",
            Command::Suite => "suite",
            Command::Converge => "converge",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Table,
}

#[derive(Debug, Clone, PartialEq, clap::Args)]
pub struct Flags {
    /// Override every check tolerance (verify, suite). A negative value makes
    /// verify fail unconditionally.
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Sampling grid half-width for smooth metrics [default: spec grid, else 20].
    #[arg(long = "grid-halfwidth")]
    pub grid_half_width: Option<f64>,
    /// Sampling grid size for smooth metrics [default: spec grid, else 4001].
    #[arg(long = "grid-points")]
    pub grid_points: Option<usize>,
    /// Decreasing mollification widths for `converge`.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_WIDTHS)]
    pub widths: Vec<f64>,
    /// Largest degree drawn by `suite`.
    #[arg(long, default_value_t = 5.0)]
    pub max_degree: f64,
    /// Largest kink count drawn by `suite`.
    #[arg(long, default_value_t = 12)]
    pub max_kinks: usize,
}

impl Default for Flags {
    fn default() -> Self {
        Flags {
            tol: None,
            seed: 42,
            trials: 1000,
            grid_half_width: None,
            grid_points: None,
            widths: DEFAULT_WIDTHS.to_vec(),
            max_degree: 5.0,
            max_kinks: 12,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "toric-height",
    version,
    about = "Heights and arithmetic volumes of toric metrics on P^1"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Metric spec file, or `-` for stdin. Not used by `suite`.
    pub spec: Option<PathBuf>,
    #[command(flatten)]
    pub flags: Flags,
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn resolve_grid(
    spec: Option<&MetricSpec>,
    flags: &Flags,
) -> Result<(SamplingGrid, bool), CliError> {
    let base = spec
        .and_then(|s| s.grid)
        .map(|g| (g.half_width, g.points))
        .unwrap_or_else(|| {
            let d = SamplingGrid::default();
            (d.half_width, d.points)
        });
    let overridden = flags.grid_half_width.is_some() || flags.grid_points.is_some();
    let half_width = flags.grid_half_width.unwrap_or(base.0);
    let points = flags.grid_points.unwrap_or(base.1);
    let grid = SamplingGrid::new(half_width, points)
        .map_err(|e| CliError::Spec(SpecError::Validation(vec![format!("grid: {e}")])))?;
    Ok((grid, overridden))
}

fn curve(x_label: &'static str, y_label: &'static str, f: &crate::pwl::PwlFunction) -> Curve {
    Curve {
        x_label,
        y_label,
        points: f
            .breakpoints()
            .iter()
            .copied()
            .zip(f.values().iter().copied())
            .collect(),
        slopes: Some((f.slope_neg_inf(), f.slope_pos_inf())),
    }
}

fn verify_body(m: &MetricFunction, tol: Option<f64>) -> Body {
    let thresholds = match tol {
        Some(t) => VerifyThresholds {
            gap_floor: t,
            orthogonality: t,
            energy_relative: t,
        },
        None => {
            let d = Tolerances::default();
            VerifyThresholds {
                gap_floor: d.gap_floor,
                orthogonality: d.orthogonality,
                energy_relative: d.energy_relative,
            }
        }
    };
    let report = m.verify();
    let passed = report.gap >= -thresholds.gap_floor
        && report.orthogonality_residual <= thresholds.orthogonality
        && relative_error(report.gap, report.energy) <= thresholds.energy_relative;
    Body::Verify {
        report,
        thresholds,
        passed,
    }
}

fn suite_config(flags: &Flags) -> Result<SuiteConfig, CliError> {
    let tolerances = match flags.tol {
        Some(t) => Tolerances {
            exactness: t,
            equality: t,
            orthogonality: t,
            gap_floor: t,
            energy_relative: t,
            mass: t,
            sampled: t,
        },
        None => Tolerances::default(),
    };
    let degrees = Interval::new(0.0, flags.max_degree)
        .map_err(|e| CliError::Usage(format!("--max-degree: {e}")))?;
    Ok(SuiteConfig::new(
        flags.trials,
        flags.seed,
        degrees,
        KinkRange {
            min: 1,
            max: flags.max_kinks,
        },
        tolerances,
    )?)
}

/// Runs one command. `suite` ignores `spec`; every other command needs one.
pub fn run_command(
    command: Command,
    spec: Option<&MetricSpec>,
    flags: &Flags,
) -> Result<Report, CliError> {
    let (grid, overridden) = resolve_grid(spec, flags)?;
    let settings = Settings {
        command: command.name().to_string(),
        tol: flags.tol,
        seed: flags.seed,
        trials: flags.trials,
        grid_half_width: grid.half_width,
        grid_points: grid.points,
        widths: flags.widths.clone(),
    };
    if command == Command::Suite {
        let config = suite_config(flags)?;
        return Ok(Report {
            settings,
            body: Body::Suite(run_suite(&config)),
        });
    }
    let spec =
        spec.ok_or_else(|| CliError::Usage(format!("`{}` needs a spec file", command.name())))?;
    let m = spec.build(if overridden { Some(grid) } else { None })?;
    let body = match command {
        Command::Height => Body::Scalar {
            name: "height",
            value: m.height(),
        },
        Command::Chivol => Body::Scalar {
            name: "chi_volume",
            value: m.chi_volume(),
        },
        Command::Roof => Body::Curve(Curve {
            x_label: "x",
            y_label: "theta",
            points: m.roof().vertices(),
            slopes: None,
        }),
        Command::Envelope => Body::Curve(curve("u", "psi", m.equilibrium().psi())),
        Command::Measure => Body::Measure(m.ma_measure()),
        Command::Verify => verify_body(&m, flags.tol),
        Command::Converge => {
            let table = convergence_study(&m, &flags.widths)?;
            let passed = table.passed();
            Body::Converge { table, passed }
        }
        Command::Suite => unreachable!("handled above"),
    };
    Ok(Report { settings, body })
}

fn read_spec(path: &PathBuf) -> Result<MetricSpec, CliError> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Io(format!("stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?
    };
    Ok(parse_spec(&text)?)
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let spec = match (&cli.spec, cli.command) {
        (Some(path), Command::Suite) => {
            return Err(CliError::Usage(format!(
                "`suite` takes no spec file (got {})",
                path.display()
            )))
        }
        (Some(path), _) => Some(read_spec(path)?),
        (None, _) => None,
    };
    let report = run_command(cli.command, spec.as_ref(), &cli.flags)?;
    let format = match cli.format {
        FormatArg::Json => Format::Json,
        FormatArg::Table => Format::Table,
    };
    let text = emit(&report, format);
    match &cli.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID_INPUT
        }
    }
}
