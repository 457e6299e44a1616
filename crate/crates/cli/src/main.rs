//! `planefield`: command-line front end.
//!
//! Exit status is 0 on success, 1 on domain errors (and failed reproduction
//! checks), 2 on configuration errors. Errors are written to stderr as one
//! JSON object.

mod commands;
mod config;
mod export;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{ConfigError, Overrides};

#[derive(Parser)]
#[command(name = "planefield", version, about = "Plane fields orthogonal to a vector field in R^3")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Field spec (JSON); overrides the config's field.
    #[arg(long, global = true)]
    field: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// obj, json or csv.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Local error bound per integration step.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// x0,y0,z0,x1,y1,z1
    #[arg(long = "box", global = true, value_delimiter = ',', allow_hyphen_values = true)]
    bbox: Option<Vec<f64>>,
    /// Grid cells per axis for surface extraction (at least 8).
    #[arg(long, global = true)]
    resolution: Option<usize>,
    /// x,y,z or x,y,z,p
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    seed: Option<Vec<f64>>,
    /// Asymptotic branch, 1 or 2.
    #[arg(long, global = true)]
    branch: Option<u8>,
}

/// A comma-separated coordinate list given as one positional argument.
#[derive(Clone, Debug)]
struct Coords(Vec<f64>);

fn coords(text: &str) -> Result<Coords, String> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()
        .map(Coords)
}

#[derive(Subcommand)]
enum Command {
    /// Parse the field and sample its integrability defect.
    Validate,
    /// Pointwise geometry and classification at a point.
    Analyze {
        /// x,y,z
        #[arg(value_parser = coords, allow_hyphen_values = true)]
        point: Option<Coords>,
    },
    /// Extract the parabolic surface.
    Surface,
    /// Trace the special curve through a seed.
    SpecialCurve {
        /// x,y,z
        #[arg(value_name = "SEED", value_parser = coords, allow_hyphen_values = true)]
        at: Option<Coords>,
    },
    /// Integrate an asymptotic line (x,y,z) or a lifted curve (x,y,z,p).
    Trace {
        #[arg(value_name = "SEED", value_parser = coords, allow_hyphen_values = true)]
        at: Option<Coords>,
        #[arg(value_name = "BRANCH")]
        which: Option<u8>,
    },
    /// Both asymptotic branches from every seed.
    Portrait,
    /// Run the golden checks of a worked example, or `all`.
    Reproduce { example: String },
}

/// Why a run failed, with its exit status.
#[derive(Debug)]
pub enum Failure {
    Config(ConfigError),
    Domain(planefield::Error),
    Checks(Vec<String>),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<planefield::Error> for Failure {
    fn from(e: planefield::Error) -> Self {
        Failure::Domain(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) | Failure::Domain(planefield::Error::IncompatibleFormat { .. }) => 2,
            Failure::Domain(_) | Failure::Checks(_) => 1,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Failure::Config(e) => json!({
                "error": "ConfigError",
                "message": e.to_string(),
                "pointer": e.pointer,
                "offset": e.offset,
            }),
            Failure::Domain(e) => {
                let debug = format!("{e:?}");
                let kind: String = debug.chars().take_while(|c| c.is_alphanumeric()).collect();
                json!({ "error": kind, "message": e.to_string() })
            }
            Failure::Checks(names) => {
                json!({ "error": "ChecksFailed", "message": "golden checks failed", "failed": names })
            }
        }
    }
}

fn configure_threads() -> Result<(), ConfigError> {
    let Ok(text) = std::env::var("PLANEFIELD_THREADS") else { return Ok(()) };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ConfigError::at("env:PLANEFIELD_THREADS", "expected a positive integer"))?;
    // Fails only if a pool was already built, which cannot happen here.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let c = cli.common;
    let mut over = Overrides {
        field: c.field,
        out: c.out,
        format: c.format,
        tol: c.tol,
        bbox: c.bbox,
        resolution: c.resolution,
        seed: c.seed,
        branch: c.branch,
    };
    let config = c.config;
    let resolve = |over: &Overrides| config::resolve(config.as_deref(), over);
    match cli.command {
        Command::Validate => commands::validate(&resolve(&over)?),
        Command::Analyze { point } => {
            over.seed = point.map(|c| c.0).or(over.seed);
            commands::analyze(&resolve(&over)?)
        }
        Command::Surface => commands::surface(&resolve(&over)?),
        Command::SpecialCurve { at } => {
            over.seed = at.map(|c| c.0).or(over.seed);
            commands::special_curve(&resolve(&over)?)
        }
        Command::Trace { at, which } => {
            over.seed = at.map(|c| c.0).or(over.seed);
            over.branch = which.or(over.branch);
            commands::trace(&resolve(&over)?)
        }
        Command::Portrait => commands::portrait(&resolve(&over)?),
        Command::Reproduce { example } => commands::reproduce(&example),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.exit_code())
        }
    }
}
