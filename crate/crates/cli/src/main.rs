use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use conetest::experiment::{
    lower_bound_report, named_cone, radius_report, run_experiment, validate_settings,
    ExperimentName, ExperimentReport,
};
use conetest::{ConeDescriptor, Error};
use serde_json::{json, Map, Value};

/// Cone-versus-cone Gaussian testing: projections, geometric radii,
/// empirical testing radii and χ² lower bounds.
#[derive(Debug, Parser)]
#[command(name = "conetest", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Project one point onto a cone and its polar.
    Project(ProjectArgs),
    /// Gaussian width and δ² radii of a named cone.
    Geometry(Common),
    /// Empirical GLRT radius of `{0}` against a named cone.
    Radius(Common),
    /// χ² lower-bound curve and lower radius for one or more priors.
    LowerBound {
        /// Prior names, comma separated.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "orthant-sparse,monotone-fg"
        )]
        prior: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a registered experiment.
    Experiment {
        /// Experiment name; may instead come from the config file.
        name: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// JSON config file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dimension grid, comma separated and increasing.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<u64>>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    /// Circular cone half-angle in radians.
    #[arg(long)]
    alpha: Option<f64>,
    /// Monte Carlo replicates per estimate.
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Named cone (orthant, monotone, monotone-centered, circular, subspace, product).
    #[arg(long)]
    cone: Option<String>,
}

#[derive(Debug, Args)]
struct ProjectArgs {
    /// Named cone, sized to match the point.
    #[arg(
        long,
        conflicts_with = "cone_json",
        required_unless_present = "cone_json"
    )]
    cone: Option<String>,
    /// Cone document, either inline JSON or a path to a JSON file.
    #[arg(long)]
    cone_json: Option<String>,
    /// The point, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    x: Vec<f64>,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<String>,
}

impl Common {
    /// Config file contents overlaid with the flags that were given.
    fn document(&self) -> Result<Map<String, Value>, Error> {
        let mut doc = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| config_error("config", format!("{}: {e}", path.display())))?;
                match serde_json::from_str(&text)
                    .map_err(|e| config_error("config", e.to_string()))?
                {
                    Value::Object(m) => m,
                    _ => return Err(config_error("$", "expected a JSON object")),
                }
            }
            None => Map::new(),
        };
        let flags = [
            ("dims", self.dims.as_ref().map(|v| json!(v))),
            ("sigma", self.sigma.map(|v| json!(v))),
            ("rho", self.rho.map(|v| json!(v))),
            ("alpha", self.alpha.map(|v| json!(v))),
            ("n", self.n.map(|v| json!(v))),
            ("seed", self.seed.map(|v| json!(v))),
            ("out", self.out.as_ref().map(|v| json!(v))),
            ("format", self.format.as_ref().map(|v| json!(v))),
            ("cone", self.cone.as_ref().map(|v| json!(v))),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                doc.insert(key.to_string(), v);
            }
        }
        Ok(doc)
    }
}

fn config_error(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

fn open_output(path: Option<&str>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| config_error("out", format!("{p}: {e}")))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit(
    report: &ExperimentReport,
    cfg: &conetest::experiment::ExperimentConfig,
) -> Result<(), Error> {
    let mut w = open_output(cfg.out.as_deref())?;
    report.write(cfg.format, &mut w)?;
    w.flush()?;
    Ok(())
}

fn project(args: &ProjectArgs) -> Result<(), Error> {
    let d = args.x.len();
    if let Some(i) = args.x.iter().position(|v| !v.is_finite()) {
        return Err(config_error(
            &format!("x[{i}]"),
            "coordinates must be finite",
        ));
    }
    let cone = match (&args.cone, &args.cone_json) {
        (_, Some(doc)) => {
            let text = if doc.trim_start().starts_with('{') {
                doc.clone()
            } else {
                std::fs::read_to_string(doc)
                    .map_err(|e| config_error("cone-json", format!("{doc}: {e}")))?
            };
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| config_error("cone-json", e.to_string()))?;
            ConeDescriptor::from_document(&value)?
        }
        (Some(name), None) => {
            let size = if name == "subspace" { d / 2 } else { d };
            named_cone(name, size.max(1), args.alpha, args.seed)?
        }
        (None, None) => return Err(config_error("cone", "required")),
    };
    if cone.dim() != d {
        return Err(config_error(
            "x",
            format!("expected {} coordinates, found {d}", cone.dim()),
        ));
    }
    let projection = cone.project(&args.x)?;
    let polar = cone.polar_project(&args.x)?;
    let distance = cone.distance(&args.x)?;
    let record = json!({
        "cone": cone.to_document(),
        "x": args.x,
        "projection": projection,
        "polar": polar,
        "distance": distance,
    });
    let mut w = open_output(args.out.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &record)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Project(args) => project(&args),
        Command::Geometry(common) => {
            let mut cfg = validate_settings(&Value::Object(common.document()?))?;
            cfg.experiment = Some(ExperimentName::GeometryReport);
            emit(&run_experiment(&cfg)?, &cfg)
        }
        Command::Radius(common) => {
            let cfg = validate_settings(&Value::Object(common.document()?))?;
            let cone = cfg.cone.clone().unwrap_or_else(|| "orthant".into());
            emit(&radius_report(&cone, &cfg)?, &cfg)
        }
        Command::LowerBound { prior, common } => {
            let cfg = validate_settings(&Value::Object(common.document()?))?;
            let priors: Vec<&str> = prior.iter().map(String::as_str).collect();
            emit(&lower_bound_report(&priors, &cfg)?, &cfg)
        }
        Command::Experiment { name, common } => {
            let mut doc = common.document()?;
            if let Some(name) = name {
                doc.insert("experiment".into(), json!(name));
            }
            let cfg = validate_settings(&Value::Object(doc))?;
            if cfg.experiment.is_none() {
                return Err(config_error("experiment", "required"));
            }
            emit(&run_experiment(&cfg)?, &cfg)
        }
    }
}

/// 2 for anything caused by the invocation itself, 3 for numerical failures.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. }
        | Error::Json(_)
        | Error::Io(_)
        | Error::Csv(_)
        | Error::InvalidCone(_) => 2,
        _ => 3,
    }
}

fn error_record(e: &Error) -> Value {
    let (kind, field) = match e {
        Error::Config { field, .. } => ("config", Some(field.as_str())),
        _ if exit_code(e) == 2 => ("config", None),
        _ => ("numerical", None),
    };
    json!({ "error": { "kind": kind, "field": field, "message": e.to_string() } })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let record = json!({ "error": { "kind": "usage", "field": null, "message": e.to_string().trim_end() } });
            eprintln!("{record}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_record(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
