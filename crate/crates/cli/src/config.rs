//! Run configuration: JSON file plus command-line overrides, resolved to a
//! fully explicit [`RunConfig`].
//!
//! Validation reports the JSON pointer of the offending key. Every default
//! that was applied is listed in [`RunConfig::defaulted`] so artifacts can
//! echo it.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use planefield::{Domain, FieldSource, FieldSpec};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_RESOLUTION: usize = 32;
pub const MIN_RESOLUTION: usize = 8;
pub const DEFAULT_T_MAX: f64 = 1.0;
pub const DEFAULT_MAX_STEP: f64 = 0.05;
pub const DEFAULT_STEP: f64 = 0.01;
pub const DEFAULT_MAX_SAMPLES: usize = 200;
pub const DEFAULT_OUT: &str = "out";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Obj,
    Json,
    Csv,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "obj" => Some(Format::Obj),
            "json" => Some(Format::Json),
            "csv" => Some(Format::Csv),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Format::Obj => "obj",
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// A configuration problem, located by JSON pointer.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{pointer}: {message}")]
pub struct ConfigError {
    pub pointer: String,
    pub message: String,
    /// Byte offset into an expression, for parse errors.
    pub offset: Option<usize>,
}

impl ConfigError {
    pub fn at(pointer: &str, message: impl Into<String>) -> Self {
        Self { pointer: pointer.to_string(), message: message.into(), offset: None }
    }
}

/// Values given on the command line; each overrides the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub field: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub tol: Option<f64>,
    pub bbox: Option<Vec<f64>>,
    pub resolution: Option<usize>,
    pub seed: Option<Vec<f64>>,
    pub branch: Option<u8>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub field: FieldSource,
    /// The box used by `surface`, `portrait` and `validate`.
    #[serde(rename = "box")]
    pub bbox: Domain,
    pub resolution: usize,
    pub seeds: Vec<Vec<f64>>,
    pub branch: u8,
    pub tol: f64,
    pub t_max: f64,
    pub max_step: f64,
    pub step: f64,
    pub max_samples: usize,
    pub out: PathBuf,
    pub format: Option<Format>,
    /// Keys filled from defaults, as JSON pointers.
    pub defaulted: Vec<String>,
}

impl RunConfig {
    pub fn spec(&self) -> Result<FieldSpec, ConfigError> {
        field_spec(self.field.clone(), "/field")
    }

    /// SHA-256 of the canonical JSON form of the resolved configuration. The
    /// output directory is left out: it does not affect any artifact's content.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        let map = value.as_object_mut().expect("config is an object");
        map.remove("out");
        if let Some(serde_json::Value::Array(d)) = map.get_mut("defaulted") {
            d.retain(|k| k != "/out");
        }
        let text = value.to_string();
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn seed(&self) -> Result<&[f64], ConfigError> {
        self.seeds.first().map(Vec::as_slice).ok_or_else(|| ConfigError::at("/seeds", "a seed is required"))
    }
}

fn field_spec(source: FieldSource, pointer: &str) -> Result<FieldSpec, ConfigError> {
    FieldSpec::from_source(source).map_err(|e| match &e {
        planefield::Error::Parse { component, source } => ConfigError {
            pointer: format!("{pointer}/{component}"),
            message: e.to_string(),
            offset: Some(source.offset()),
        },
        _ => ConfigError::at(pointer, e.to_string()),
    })
}

fn read_json(path: &Path, pointer: &str) -> Result<Value, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::at(pointer, format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| ConfigError::at(pointer, format!("{}: {e}", path.display())))
}

fn load_field(value: &Value, base: &Path) -> Result<FieldSource, ConfigError> {
    let (value, pointer) = match value {
        Value::String(p) => (read_json(&base.join(p), "/field")?, "/field"),
        Value::Object(_) => (value.clone(), "/field"),
        _ => return Err(ConfigError::at("/field", "expected a path or an inline field object")),
    };
    let source: FieldSource = serde_json::from_value(value).map_err(|e| ConfigError::at(pointer, e.to_string()))?;
    field_spec(source.clone(), pointer)?;
    Ok(source)
}

fn positive(v: &Value, pointer: &str) -> Result<f64, ConfigError> {
    match v.as_f64() {
        Some(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(ConfigError::at(pointer, "expected a positive number")),
    }
}

fn count(v: &Value, pointer: &str) -> Result<usize, ConfigError> {
    v.as_u64().map(|n| n as usize).ok_or_else(|| ConfigError::at(pointer, "expected a nonnegative integer"))
}

fn numbers(v: &Value, pointer: &str) -> Result<Vec<f64>, ConfigError> {
    let arr = v.as_array().ok_or_else(|| ConfigError::at(pointer, "expected an array of numbers"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| x.as_f64().ok_or_else(|| ConfigError::at(&format!("{pointer}/{i}"), "expected a number")))
        .collect()
}

fn check_resolution(n: usize, pointer: &str) -> Result<usize, ConfigError> {
    if n < MIN_RESOLUTION {
        return Err(ConfigError::at(pointer, format!("resolution ≥ {MIN_RESOLUTION} required, got {n}")));
    }
    Ok(n)
}

fn check_seed(s: Vec<f64>, pointer: &str) -> Result<Vec<f64>, ConfigError> {
    if s.len() != 3 && s.len() != 4 {
        return Err(ConfigError::at(pointer, format!("a seed has 3 or 4 coordinates, got {}", s.len())));
    }
    Ok(s)
}

fn check_box(v: &[f64], pointer: &str) -> Result<Domain, ConfigError> {
    if v.len() != 6 {
        return Err(ConfigError::at(pointer, "a box is x0,y0,z0,x1,y1,z1"));
    }
    Domain::new([v[0], v[1], v[2]], [v[3], v[4], v[5]]).map_err(|e| ConfigError::at(pointer, e.to_string()))
}

fn check_branch(b: u64, pointer: &str) -> Result<u8, ConfigError> {
    match b {
        1 | 2 => Ok(b as u8),
        _ => Err(ConfigError::at(pointer, "branch is 1 or 2")),
    }
}

const KEYS: [&str; 12] = [
    "field",
    "box",
    "resolution",
    "seeds",
    "branch",
    "tol",
    "t_max",
    "max_step",
    "step",
    "max_samples",
    "out",
    "format",
];

/// Resolves a configuration from an optional file and command-line values.
/// A field must come from one of the two.
pub fn resolve(path: Option<&Path>, over: &Overrides) -> Result<RunConfig, ConfigError> {
    let (obj, base) = match path {
        Some(p) => {
            let v = read_json(p, "")?;
            let Value::Object(obj) = v else { return Err(ConfigError::at("", "expected a JSON object")) };
            (obj, p.parent().map(Path::to_path_buf).unwrap_or_default())
        }
        None => (Map::new(), PathBuf::new()),
    };
    // `command` and `example` are informational; the CLI decides what runs.
    for key in obj.keys() {
        if !KEYS.contains(&key.as_str()) && key != "command" && key != "example" {
            return Err(ConfigError::at(&format!("/{key}"), "unknown key"));
        }
    }
    let mut defaulted = Vec::new();
    let mut default = |key: &str| defaulted.push(format!("/{key}"));

    let field = match (&over.field, obj.get("field")) {
        (Some(p), _) => load_field(&Value::String(p.display().to_string()), Path::new(""))?,
        (None, Some(v)) => load_field(v, &base)?,
        (None, None) => return Err(ConfigError::at("/field", "a field is required")),
    };
    let bbox = match (&over.bbox, obj.get("box")) {
        (Some(v), _) => check_box(v, "/box")?,
        (None, Some(v)) => check_box(&numbers(v, "/box")?, "/box")?,
        (None, None) => {
            default("box");
            field.domain
        }
    };
    let resolution = match (over.resolution, obj.get("resolution")) {
        (Some(n), _) => check_resolution(n, "/resolution")?,
        (None, Some(v)) => check_resolution(count(v, "/resolution")?, "/resolution")?,
        (None, None) => {
            default("resolution");
            DEFAULT_RESOLUTION
        }
    };
    let seeds = match (&over.seed, obj.get("seeds")) {
        (Some(s), _) => vec![check_seed(s.clone(), "/seeds/0")?],
        (None, Some(v)) => {
            let arr = v.as_array().ok_or_else(|| ConfigError::at("/seeds", "expected an array of seeds"))?;
            arr.iter()
                .enumerate()
                .map(|(i, s)| {
                    let p = format!("/seeds/{i}");
                    check_seed(numbers(s, &p)?, &p)
                })
                .collect::<Result<_, _>>()?
        }
        (None, None) => {
            default("seeds");
            Vec::new()
        }
    };
    let branch = match (over.branch, obj.get("branch")) {
        (Some(b), _) => check_branch(b as u64, "/branch")?,
        (None, Some(v)) => check_branch(v.as_u64().unwrap_or(0), "/branch")?,
        (None, None) => {
            default("branch");
            1
        }
    };
    let tol = match (over.tol, obj.get("tol")) {
        (Some(t), _) => positive(&Value::from(t), "/tol")?,
        (None, Some(v)) => positive(v, "/tol")?,
        (None, None) => {
            default("tol");
            DEFAULT_TOL
        }
    };
    let mut real = |key: &str, fallback: f64| match obj.get(key) {
        Some(v) => positive(v, &format!("/{key}")),
        None => {
            default(key);
            Ok(fallback)
        }
    };
    let t_max = real("t_max", DEFAULT_T_MAX)?;
    let max_step = real("max_step", DEFAULT_MAX_STEP)?;
    let step = real("step", DEFAULT_STEP)?;
    let max_samples = match obj.get("max_samples") {
        Some(v) => count(v, "/max_samples")?,
        None => {
            default("max_samples");
            DEFAULT_MAX_SAMPLES
        }
    };
    let out = match (&over.out, obj.get("out")) {
        (Some(p), _) => p.clone(),
        (None, Some(Value::String(p))) => base.join(p),
        (None, Some(_)) => return Err(ConfigError::at("/out", "expected a path")),
        (None, None) => {
            default("out");
            PathBuf::from(DEFAULT_OUT)
        }
    };
    let format = match (&over.format, obj.get("format")) {
        (Some(f), _) => Some(Format::parse(f).ok_or_else(|| ConfigError::at("/format", "expected obj, json or csv"))?),
        (None, Some(Value::String(f))) => {
            Some(Format::parse(f).ok_or_else(|| ConfigError::at("/format", "expected obj, json or csv"))?)
        }
        (None, Some(_)) => return Err(ConfigError::at("/format", "expected obj, json or csv")),
        (None, None) => {
            default("format");
            None
        }
    };
    Ok(RunConfig {
        field,
        bbox,
        resolution,
        seeds,
        branch,
        tol,
        t_max,
        max_step,
        step,
        max_samples,
        out,
        format,
        defaulted,
    })
}
