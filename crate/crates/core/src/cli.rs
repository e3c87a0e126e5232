//! File-driven front end: parses JSON/CSV instances, dispatches to the
//! library, and assembles a canonical [`Report`].
//!
//! Exit codes: ok 0, violated 1, parse/validation 2, domain 3, quadrature 4.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::bounds::{chain_with_modulus, resolve_modulus, Modulus, CHAIN_SLACK};
use crate::convexity::{
    estimate_strong_modulus, is_n_strongly_convex, named_function, Interval, DIVIDED_DIFFERENCE_TOL,
};
use crate::divergence::{
    aggregated_divergence_bounds, csiszar_divergence, divergence_bounds, kernel_by_name, ConvexityClass,
    DistributionPair,
};
use crate::error::Error;
use crate::fink::{
    fink_identity_check, higher_order_sherman_bound, sherman_difference_identity, BOUND_SLACK,
    DEFAULT_KERNEL_GRID, KERNEL_SIGN_TOL,
};
use crate::majorization::{
    majorization_certificate, StochasticKind, StochasticMatrix, WeightedPair, WeightedVector, PAIR_TOL,
};
use crate::quadrature::QuadratureConfig;
use crate::report::{render, ExitStatus, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_QUADRATURE: i32 = 4;

/// Samples drawn by the seeded cross-check of an auto-certified modulus.
pub const MODULUS_SAMPLES: usize = 1000;
/// Default relation tolerance for `majorize`.
pub const MAJORIZE_TOL: f64 = 1e-10;
/// An identity residual passes when it is at most this multiple of the
/// quadrature tolerance.
pub const IDENTITY_RESIDUAL_FACTOR: f64 = 10.0;

const CHAIN_DEFAULT_FUNCTION: &str = "square";
const IDENTITY_DEFAULT_FUNCTION: &str = "exp";
const DIVERGENCE_DEFAULT_KERNEL: &str = "kl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Chain,
    Divergence,
    Majorize,
    VerifyIdentity,
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "chain" => Ok(Command::Chain),
            "divergence" => Ok(Command::Divergence),
            "majorize" => Ok(Command::Majorize),
            "verify-identity" => Ok(Command::VerifyIdentity),
            other => Err(format!(
                "unknown command `{other}` (expected chain, divergence, majorize, verify-identity)"
            )),
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Chain => "chain",
            Command::Divergence => "divergence",
            Command::Majorize => "majorize",
            Command::VerifyIdentity => "verify-identity",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModulusChoice {
    Auto,
    Explicit(f64),
}

impl FromStr for ModulusChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(ModulusChoice::Auto);
        }
        match s.parse::<f64>() {
            Ok(c) if c.is_finite() && c >= 0.0 => Ok(ModulusChoice::Explicit(c)),
            _ => Err(format!("modulus must be `auto` or a nonnegative number, got `{s}`")),
        }
    }
}

/// Parses `"a,b"`.
pub fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("interval must look like `a,b`, got `{s}`"));
    }
    let lo = parts[0].parse::<f64>().map_err(|e| format!("interval lower bound: {e}"))?;
    let hi = parts[1].parse::<f64>().map_err(|e| format!("interval upper bound: {e}"))?;
    Ok((lo, hi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub input_path: PathBuf,
    /// Function name for `chain`/`verify-identity`, kernel name for `divergence`.
    pub kernel_name: Option<String>,
    pub alpha: Option<f64>,
    pub interval: Option<(f64, f64)>,
    pub modulus: ModulusChoice,
    pub order_n: usize,
    pub quad_abs_tol: f64,
    pub grid_size: usize,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command, input_path: impl Into<PathBuf>) -> Self {
        Self {
            command,
            input_path: input_path.into(),
            kernel_name: None,
            alpha: None,
            interval: None,
            modulus: ModulusChoice::Auto,
            order_n: 2,
            quad_abs_tol: 1e-9,
            grid_size: 10_001,
            seed: 0,
            output_path: None,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.order_n < 1 {
            return Err(CliError::Validation("order must be at least 1".into()));
        }
        if !(self.quad_abs_tol > 0.0 && self.quad_abs_tol.is_finite()) {
            return Err(CliError::Validation("quadrature tolerance must be positive".into()));
        }
        if self.grid_size < 2 {
            return Err(CliError::Validation("grid needs at least 2 points".into()));
        }
        if let Some((lo, hi)) = self.interval {
            Interval::new(lo, hi).map_err(|e| CliError::Validation(format!("interval: {e}")))?;
        }
        Ok(())
    }

    fn quadrature(&self) -> QuadratureConfig {
        QuadratureConfig::with_abs_tol(self.quad_abs_tol)
    }

    fn echo(&self) -> Value {
        let quad = self.quadrature();
        json!({
            "command": self.command,
            "input": self.input_path.display().to_string(),
            "output": self.output_path.as_ref().map(|p| p.display().to_string()),
            "kernel": self.kernel_name,
            "alpha": self.alpha,
            "interval": self.interval.map(|(lo, hi)| vec![lo, hi]),
            "modulus": match self.modulus {
                ModulusChoice::Auto => json!("auto"),
                ModulusChoice::Explicit(c) => json!(c),
            },
            "order": self.order_n,
            "grid": self.grid_size,
            "seed": self.seed,
            "quadrature": quad,
            "tolerances": {
                "chain_slack": CHAIN_SLACK,
                "higher_order_slack": BOUND_SLACK,
                "pair_tolerance": PAIR_TOL,
                "majorize_tolerance": MAJORIZE_TOL,
                "divided_difference": DIVIDED_DIFFERENCE_TOL,
                "kernel_sign": KERNEL_SIGN_TOL,
                "kernel_grid": DEFAULT_KERNEL_GRID,
                "identity_residual_factor": IDENTITY_RESIDUAL_FACTOR,
                "modulus_samples": MODULUS_SAMPLES,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("domain error: {0}")]
    Domain(Error),

    #[error("quadrature failure: {0}")]
    Quadrature(Error),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation(_) | CliError::Io { .. } => EXIT_PARSE,
            CliError::Domain(_) => EXIT_DOMAIN,
            CliError::Quadrature(_) => EXIT_QUADRATURE,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "parse",
            CliError::Validation(_) => "validation",
            CliError::Domain(_) => "domain",
            CliError::Quadrature(_) => "quadrature",
            CliError::Io { .. } => "io",
        }
    }

    fn to_value(&self) -> Value {
        json!({"kind": self.kind(), "message": self.to_string(), "exit_code": self.exit_code()})
    }

    fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::QuadratureFailure { .. } => CliError::Quadrature(e),
            other => CliError::Domain(other),
        }
    }
}

/// Maps a module error raised while checking input invariants.
fn invalid(context: &str, e: Error) -> CliError {
    match e {
        Error::InvalidWeight { index, value } => {
            CliError::Validation(format!("weights nonnegative ({context} weight {index} is {value})"))
        }
        Error::NonPositiveEntry { index, value } => {
            CliError::Validation(format!("entries positive ({context} entry {index} is {value})"))
        }
        Error::MajorizationNotVerified { .. } => {
            CliError::Validation(format!("weighted majorization ({context}): {e}"))
        }
        other => CliError::Validation(format!("{context}: {other}")),
    }
}

// ---------------------------------------------------------------------------
// Input

#[derive(Debug, Clone)]
pub struct ChainInstance {
    pub pair: WeightedPair,
    /// `true` when `(y, a)` were computed from `x`, `b`, `A`.
    pub generated: bool,
    pub function: Option<String>,
    pub interval: Option<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct DivergenceInstance {
    pub pair: DistributionPair,
    pub aggregation: Option<StochasticMatrix>,
    pub kernel: Option<String>,
    pub alpha: Option<f64>,
    pub interval: Option<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct MajorizeInstance {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub struct IdentityInstance {
    pub pair: Option<WeightedPair>,
    pub at: Vec<f64>,
    pub function: Option<String>,
    pub interval: Option<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub enum Instance {
    Chain(ChainInstance),
    Divergence(DivergenceInstance),
    Majorize(MajorizeInstance),
    VerifyIdentity(IdentityInstance),
}

#[derive(Debug, Clone)]
pub struct ParsedInput {
    /// The file held a top-level array of instances.
    pub batch: bool,
    pub instances: Vec<Instance>,
}

struct Loc {
    instance: Option<usize>,
}

impl Loc {
    fn field(&self, name: &str) -> String {
        match self.instance {
            Some(i) => format!("instance {i}, field `{name}`"),
            None => format!("field `{name}`"),
        }
    }

    fn here(&self) -> String {
        match self.instance {
            Some(i) => format!("instance {i}"),
            None => "top level".to_string(),
        }
    }
}

fn numbers(obj: &Map<String, Value>, key: &str, loc: &Loc) -> Result<Option<Vec<f64>>, CliError> {
    let Some(v) = obj.get(key) else {
        return Ok(None);
    };
    let items = v
        .as_array()
        .ok_or_else(|| CliError::parse(loc.field(key), "expected an array of numbers"))?;
    items
        .iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_f64()
                .ok_or_else(|| CliError::parse(loc.field(key), format!("entry {i} is not a number")))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn required(obj: &Map<String, Value>, key: &str, loc: &Loc) -> Result<Vec<f64>, CliError> {
    numbers(obj, key, loc)?.ok_or_else(|| CliError::parse(loc.here(), format!("missing field `{key}`")))
}

fn number_matrix(obj: &Map<String, Value>, key: &str, loc: &Loc) -> Result<Option<Vec<Vec<f64>>>, CliError> {
    let Some(v) = obj.get(key) else {
        return Ok(None);
    };
    let rows = v
        .as_array()
        .ok_or_else(|| CliError::parse(loc.field(key), "expected an array of arrays of numbers"))?;
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| CliError::parse(loc.field(key), format!("row {i} is not an array")))?;
        let parsed = row
            .iter()
            .enumerate()
            .map(|(j, x)| {
                x.as_f64()
                    .ok_or_else(|| CliError::parse(loc.field(key), format!("entry ({i}, {j}) is not a number")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.push(parsed);
    }
    Ok(Some(out))
}

fn string(obj: &Map<String, Value>, key: &str, loc: &Loc) -> Result<Option<String>, CliError> {
    match obj.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(CliError::parse(loc.field(key), "expected a string")),
    }
}

fn scalar(obj: &Map<String, Value>, key: &str, loc: &Loc) -> Result<Option<f64>, CliError> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| CliError::parse(loc.field(key), "expected a number")),
    }
}

fn interval_field(obj: &Map<String, Value>, loc: &Loc) -> Result<Option<(f64, f64)>, CliError> {
    match numbers(obj, "interval", loc)? {
        None => Ok(None),
        Some(v) if v.len() == 2 => {
            Interval::new(v[0], v[1]).map_err(|e| invalid("interval", e))?;
            Ok(Some((v[0], v[1])))
        }
        Some(_) => Err(CliError::parse(loc.field("interval"), "expected [lower, upper]")),
    }
}

fn reject_unknown(obj: &Map<String, Value>, allowed: &[&str], loc: &Loc) -> Result<(), CliError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(CliError::parse(
            loc.here(),
            format!("unknown field `{k}` (expected one of {})", allowed.join(", ")),
        )),
        None => Ok(()),
    }
}

const PAIR_KEYS: [&str; 5] = ["x", "a", "y", "b", "A"];

fn weighted_pair(obj: &Map<String, Value>, loc: &Loc) -> Result<(WeightedPair, bool), CliError> {
    let x = required(obj, "x", loc)?;
    let b = required(obj, "b", loc)?;
    let entries = number_matrix(obj, "A", loc)?
        .ok_or_else(|| CliError::parse(loc.here(), "missing field `A`"))?;
    let matrix = StochasticMatrix::new(entries, StochasticKind::Row).map_err(|e| invalid("A", e))?;
    let a = numbers(obj, "a", loc)?;
    let y = numbers(obj, "y", loc)?;
    match (a, y) {
        (None, None) => {
            WeightedVector::new(vec![0.0; b.len()], b.clone()).map_err(|e| invalid("b", e))?;
            WeightedPair::generate(x, b, matrix)
                .map(|p| (p, true))
                .map_err(|e| invalid("generated pair", e))
        }
        (Some(a), Some(y)) => {
            let source = WeightedVector::new(x, a).map_err(|e| invalid("(x, a)", e))?;
            let target = WeightedVector::new(y, b).map_err(|e| invalid("(y, b)", e))?;
            let scale = source
                .points()
                .iter()
                .chain(source.weights())
                .fold(1.0_f64, |m, v| m.max(v.abs()));
            WeightedPair::verified(source, target, matrix, PAIR_TOL * scale)
                .map(|p| (p, false))
                .map_err(|e| invalid("y = xAᵀ, a = bA", e))
        }
        _ => Err(CliError::parse(
            loc.here(),
            "give both `y` and `a`, or neither to generate them from `x`, `b`, `A`",
        )),
    }
}

fn parse_instance(command: Command, value: &Value, loc: &Loc) -> Result<Instance, CliError> {
    let obj = value
        .as_object()
        .ok_or_else(|| CliError::parse(loc.here(), "expected a JSON object"))?;
    match command {
        Command::Chain => {
            reject_unknown(obj, &["x", "a", "y", "b", "A", "function", "interval"], loc)?;
            let (pair, generated) = weighted_pair(obj, loc)?;
            Ok(Instance::Chain(ChainInstance {
                pair,
                generated,
                function: string(obj, "function", loc)?,
                interval: interval_field(obj, loc)?,
            }))
        }
        Command::Divergence => {
            reject_unknown(obj, &["p", "q", "R", "kernel", "alpha", "interval"], loc)?;
            let p = required(obj, "p", loc)?;
            let q = required(obj, "q", loc)?;
            let pair = DistributionPair::new(p, q).map_err(|e| invalid("(p, q)", e))?;
            let aggregation = number_matrix(obj, "R", loc)?
                .map(|r| StochasticMatrix::new(r, StochasticKind::Column).map_err(|e| invalid("R", e)))
                .transpose()?;
            if let Some(r) = &aggregation {
                if r.cols() != pair.len() {
                    return Err(CliError::Validation(format!(
                        "R has {} columns but the distributions have length {}",
                        r.cols(),
                        pair.len()
                    )));
                }
            }
            Ok(Instance::Divergence(DivergenceInstance {
                pair,
                aggregation,
                kernel: string(obj, "kernel", loc)?,
                alpha: scalar(obj, "alpha", loc)?,
                interval: interval_field(obj, loc)?,
            }))
        }
        Command::Majorize => {
            reject_unknown(obj, &["x", "y", "tol"], loc)?;
            let x = required(obj, "x", loc)?;
            let y = required(obj, "y", loc)?;
            if x.len() != y.len() {
                return Err(CliError::Validation(format!(
                    "x and y must have equal length ({} vs {})",
                    x.len(),
                    y.len()
                )));
            }
            if x.is_empty() || x.iter().chain(&y).any(|v| !v.is_finite()) {
                return Err(CliError::Validation("x and y must be nonempty and finite".into()));
            }
            let tol = scalar(obj, "tol", loc)?.unwrap_or(MAJORIZE_TOL);
            if !(tol >= 0.0) {
                return Err(CliError::Validation("tolerance nonnegative".into()));
            }
            Ok(Instance::Majorize(MajorizeInstance { x, y, tol }))
        }
        Command::VerifyIdentity => {
            reject_unknown(obj, &["x", "a", "y", "b", "A", "at", "function", "interval"], loc)?;
            let pair = if PAIR_KEYS.iter().any(|k| obj.contains_key(*k)) {
                Some(weighted_pair(obj, loc)?.0)
            } else {
                None
            };
            let at = numbers(obj, "at", loc)?.unwrap_or_default();
            if pair.is_none() && at.is_empty() {
                return Err(CliError::parse(
                    loc.here(),
                    "expected a pair (`x`, `b`, `A`, ...) or evaluation points `at`",
                ));
            }
            Ok(Instance::VerifyIdentity(IdentityInstance {
                pair,
                at,
                function: string(obj, "function", loc)?,
                interval: interval_field(obj, loc)?,
            }))
        }
    }
}

fn parse_csv(text: &str) -> Result<DistributionPair, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let (mut p, mut q) = (Vec::new(), Vec::new());
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::parse("csv", e.to_string()))?;
        let line = record.position().map_or(i as u64 + 1, |pos| pos.line());
        if record.len() != 2 {
            return Err(CliError::parse(
                format!("line {line}"),
                format!("expected 2 columns (p, q), found {}", record.len()),
            ));
        }
        let parsed: Vec<Option<f64>> = record.iter().map(|s| s.parse::<f64>().ok()).collect();
        match (parsed[0], parsed[1]) {
            (Some(pi), Some(qi)) => {
                p.push(pi);
                q.push(qi);
            }
            // a non-numeric first row is a header
            _ if i == 0 => continue,
            _ => {
                return Err(CliError::parse(format!("line {line}"), "expected two numbers"));
            }
        }
    }
    if p.is_empty() {
        return Err(CliError::parse("csv", "no data rows"));
    }
    DistributionPair::new(p, q).map_err(|e| invalid("(p, q)", e))
}

/// Reads and validates the instances in `path` for `command`. Files ending
/// in `.csv` hold one distribution pair; everything else is JSON, either one
/// instance object or an array of them.
pub fn parse_input(path: &Path, command: Command) -> Result<ParsedInput, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let is_csv = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        if command != Command::Divergence {
            return Err(CliError::parse("file", "CSV input is accepted only for `divergence`"));
        }
        let pair = parse_csv(&text)?;
        return Ok(ParsedInput {
            batch: false,
            instances: vec![Instance::Divergence(DivergenceInstance {
                pair,
                aggregation: None,
                kernel: None,
                alpha: None,
                interval: None,
            })],
        });
    }
    parse_json(&text, command)
}

/// [`parse_input`] on JSON text.
pub fn parse_json(text: &str, command: Command) -> Result<ParsedInput, CliError> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| CliError::parse(format!("line {}, column {}", e.line(), e.column()), e.to_string()))?;
    match &value {
        Value::Array(items) => {
            if items.is_empty() {
                return Err(CliError::parse("top level", "empty instance list"));
            }
            let instances = items
                .iter()
                .enumerate()
                .map(|(i, v)| parse_instance(command, v, &Loc { instance: Some(i) }))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(ParsedInput {
                batch: true,
                instances,
            })
        }
        _ => Ok(ParsedInput {
            batch: false,
            instances: vec![parse_instance(command, &value, &Loc { instance: None })?],
        }),
    }
}

// ---------------------------------------------------------------------------
// Dispatch

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: u64,
    pub command: Command,
    pub config: Value,
    /// One payload, or an array of them for batch input.
    pub result: Value,
    pub certificates: Vec<Value>,
    pub warnings: Vec<String>,
    pub exit_status: ExitStatus,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<Value>,
}

impl Report {
    /// Canonical JSON text.
    pub fn to_json(&self) -> String {
        render(self)
    }

    /// Report for a run that failed before producing results.
    pub fn from_error(config: &RunConfig, err: &CliError) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            command: config.command,
            config: config.echo(),
            result: Value::Null,
            certificates: Vec::new(),
            warnings: Vec::new(),
            exit_status: ExitStatus::Error,
            exit_code: err.exit_code(),
            error: Some(err.to_value()),
        }
    }
}

#[derive(Default)]
struct Outcome {
    result: Value,
    certificates: Vec<Value>,
    warnings: Vec<String>,
    violated: bool,
}

fn tagged<T: Serialize>(kind: &str, payload: &T) -> Value {
    let mut v = serde_json::to_value(payload).unwrap_or(Value::Null);
    if let Value::Object(map) = &mut v {
        map.insert("kind".into(), json!(kind));
    }
    v
}

fn resolve_interval(config: &RunConfig, instance: Option<(f64, f64)>, fallback: impl FnOnce() -> crate::Result<Interval>) -> Result<Interval, CliError> {
    match config.interval.or(instance) {
        Some((lo, hi)) => Ok(Interval::new(lo, hi)?),
        None => Ok(fallback()?),
    }
}

fn pair_value(pair: &WeightedPair) -> Value {
    json!({
        "x": pair.source().points(),
        "a": pair.source().weights(),
        "y": pair.target().points(),
        "b": pair.target().weights(),
    })
}

fn run_chain(config: &RunConfig, inst: &ChainInstance) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let interval = resolve_interval(config, inst.interval, || inst.pair.hull())?;
    let name = config
        .kernel_name
        .as_deref()
        .or(inst.function.as_deref())
        .unwrap_or(CHAIN_DEFAULT_FUNCTION);
    let spec = named_function(name, interval)?;
    let modulus = match config.modulus {
        ModulusChoice::Auto => Modulus::Auto,
        ModulusChoice::Explicit(c) => Modulus::Fixed(c),
    };
    let resolved = resolve_modulus(&spec, modulus, config.grid_size)?;
    if let Some(cert) = &resolved.certificate {
        out.certificates.push(tagged("modulus", cert));
    }
    if resolved.value > 0.0 {
        let verdict = is_n_strongly_convex(&spec, 2, resolved.value, MODULUS_SAMPLES, config.seed)?;
        if !verdict.passed() {
            out.warnings
                .push(format!("sampled divided difference fell below the modulus: {verdict:?}"));
        }
        out.certificates.push(tagged("modulus_sampling", &verdict));
    }
    if let Some(check) = inst.pair.check() {
        out.certificates.push(tagged("weighted_majorization", check));
    }
    let chain = chain_with_modulus(&inst.pair, &spec, resolved.value)?;
    let violations = chain.violations(CHAIN_SLACK);
    out.violated = !violations.is_empty();
    out.warnings.extend(chain.warnings.iter().cloned());
    out.warnings.extend(violations);

    let mut result = json!({
        "chain": chain,
        "pair": pair_value(&inst.pair),
        "generated": inst.generated,
    });
    if config.order_n >= 3 {
        let n = config.order_n;
        let cert = estimate_strong_modulus(&spec, n, config.grid_size)?;
        out.certificates.push(tagged("higher_order_modulus", &cert));
        let c = match config.modulus {
            ModulusChoice::Auto => cert.modulus.max(0.0),
            ModulusChoice::Explicit(c) => c,
        };
        match higher_order_sherman_bound(&inst.pair, &spec, n, c, &config.quadrature()) {
            Ok(bound) => {
                if !bound.holds {
                    out.violated = true;
                    out.warnings.push(format!("order-{n} bound failed"));
                }
                result["higher_order"] = serde_json::to_value(&bound).unwrap_or(Value::Null);
            }
            Err(Error::KernelConditionIndefinite) => out
                .warnings
                .push(format!("order-{n} bound skipped: kernel changes sign")),
            Err(e @ Error::NotConvex { .. }) => out
                .warnings
                .push(format!("order-{n} bound skipped: {e}")),
            Err(e) => return Err(e.into()),
        }
    }
    out.result = result;
    Ok(out)
}

fn run_divergence(config: &RunConfig, inst: &DivergenceInstance) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let interval = resolve_interval(config, inst.interval, || inst.pair.ratio_interval())?;
    let name = config
        .kernel_name
        .as_deref()
        .or(inst.kernel.as_deref())
        .unwrap_or(DIVERGENCE_DEFAULT_KERNEL);
    let kernel = kernel_by_name(name, config.alpha.or(inst.alpha), interval)?;
    if let Some(cert) = kernel.certificate() {
        out.certificates.push(tagged("modulus", cert));
    }
    let value = csiszar_divergence(&inst.pair, &kernel)?;
    let mut result = json!({
        "kernel": kernel.name(),
        "convexity": kernel.convexity(),
        "normalized": kernel.normalized(),
        "interval": [interval.lower(), interval.upper()],
        "value": value,
    });
    match kernel.convexity() {
        ConvexityClass::StronglyConvex { modulus } => {
            let c = match config.modulus {
                ModulusChoice::Auto => modulus,
                ModulusChoice::Explicit(c) => c,
            };
            let sandwich = match &inst.aggregation {
                Some(r) => aggregated_divergence_bounds(&inst.pair, r, &kernel, c)?,
                None => divergence_bounds(&inst.pair, &kernel, c)?,
            };
            let violations = sandwich.violations(CHAIN_SLACK);
            out.violated = !violations.is_empty();
            out.warnings.extend(violations);
            result["sandwich"] = serde_json::to_value(&sandwich).unwrap_or(Value::Null);
        }
        _ => out.warnings.push(format!(
            "kernel `{}` is not strongly convex; bounds are not available",
            kernel.name()
        )),
    }
    out.result = result;
    Ok(out)
}

fn run_majorize(inst: &MajorizeInstance) -> Result<Outcome, CliError> {
    let cert = majorization_certificate(&inst.x, &inst.y, inst.tol)?;
    Ok(Outcome {
        result: json!({"certificate": cert, "tolerance": inst.tol}),
        ..Outcome::default()
    })
}

fn run_identity(config: &RunConfig, inst: &IdentityInstance) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let interval = resolve_interval(config, inst.interval, || {
        let mut pts: Vec<f64> = inst.at.clone();
        if let Some(pair) = &inst.pair {
            pts.extend(pair.source().points());
            pts.extend(pair.target().points());
        }
        let lo = pts.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = pts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo, hi)
    })?;
    let name = config
        .kernel_name
        .as_deref()
        .or(inst.function.as_deref())
        .unwrap_or(IDENTITY_DEFAULT_FUNCTION);
    let spec = named_function(name, interval)?;
    let quad = config.quadrature();
    let limit = IDENTITY_RESIDUAL_FACTOR * quad.abs_tol;
    let mut result = Map::new();
    if let Some(pair) = &inst.pair {
        let report = sherman_difference_identity(pair, &spec, config.order_n, &quad)?;
        if !report.within_tolerance() {
            out.violated = true;
            out.warnings
                .push(format!("identity residual {:e} exceeds {limit:e}", report.residual));
        }
        result.insert("sherman_difference".into(), serde_json::to_value(&report).unwrap_or(Value::Null));
    }
    if !inst.at.is_empty() {
        let mut expansions = Vec::with_capacity(inst.at.len());
        for &x in &inst.at {
            let e = fink_identity_check(&spec, x, config.order_n, &quad)?;
            if !(e.residual.abs() <= limit) {
                out.violated = true;
                out.warnings
                    .push(format!("expansion residual {:e} at {x} exceeds {limit:e}", e.residual));
            }
            expansions.push(e);
        }
        result.insert("expansions".into(), serde_json::to_value(&expansions).unwrap_or(Value::Null));
    }
    out.result = Value::Object(result);
    Ok(out)
}

fn run_instance(config: &RunConfig, instance: &Instance) -> Result<Outcome, CliError> {
    match instance {
        Instance::Chain(inst) => run_chain(config, inst),
        Instance::Divergence(inst) => run_divergence(config, inst),
        Instance::Majorize(inst) => run_majorize(inst),
        Instance::VerifyIdentity(inst) => run_identity(config, inst),
    }
}

/// Parses the input and evaluates every instance in order.
///
/// A single-instance failure is returned as `Err`. In batch mode each
/// instance is isolated: failures become `{"error": …}` entries and the
/// report carries the exit code of the first one.
pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    let input = parse_input(&config.input_path, config.command)?;
    log::info!(
        "{}: {} instance(s) from {}",
        config.command,
        input.instances.len(),
        config.input_path.display()
    );
    let mut results = Vec::with_capacity(input.instances.len());
    let mut certificates = Vec::new();
    let mut warnings = Vec::new();
    let mut violated = false;
    let mut first_error: Option<CliError> = None;

    for (i, instance) in input.instances.iter().enumerate() {
        let prefix = |s: String| if input.batch { format!("instance {i}: {s}") } else { s };
        match run_instance(config, instance) {
            Ok(outcome) => {
                violated |= outcome.violated;
                results.push(outcome.result);
                for mut cert in outcome.certificates {
                    if input.batch {
                        cert["instance"] = json!(i);
                    }
                    certificates.push(cert);
                }
                warnings.extend(outcome.warnings.into_iter().map(prefix));
            }
            Err(e) if !input.batch => return Err(e),
            Err(e) => {
                log::warn!("instance {i} failed: {e}");
                results.push(json!({"error": e.to_value()}));
                warnings.push(prefix(e.to_string()));
                first_error.get_or_insert(e);
            }
        }
    }

    let (exit_status, exit_code) = match (&first_error, violated) {
        (Some(e), _) => (ExitStatus::Error, e.exit_code()),
        (None, true) => (ExitStatus::Violated, EXIT_VIOLATED),
        (None, false) => (ExitStatus::Ok, EXIT_OK),
    };
    let result = if input.batch {
        Value::Array(results)
    } else {
        results.pop().unwrap_or(Value::Null)
    };
    Ok(Report {
        schema: SCHEMA_VERSION,
        command: config.command,
        config: config.echo(),
        result,
        certificates,
        warnings,
        exit_status,
        exit_code,
        error: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_chain_parses() {
        let text = r#"{"x":[0.5],"a":[1],"y":[0.5],"b":[1],"A":[[1]]}"#;
        let parsed = parse_json(text, Command::Chain).unwrap();
        assert!(!parsed.batch);
        assert!(matches!(&parsed.instances[0], Instance::Chain(c) if !c.generated));
    }

    #[test]
    fn negative_weight_is_a_validation_error() {
        let text = r#"{"x":[0.2,0.8],"b":[1.5,-0.5],"A":[[1,0],[0,1]]}"#;
        match parse_json(text, Command::Chain) {
            Err(CliError::Validation(msg)) => assert!(msg.starts_with("weights nonnegative"), "{msg}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_locations() {
        let err = parse_json("{\"x\": [1,\n 2,, 3]}", Command::Majorize).unwrap_err();
        assert!(matches!(&err, CliError::Parse { location, .. } if location.starts_with("line 2")));
        let err = parse_json(r#"[{"x":[1],"y":[1]},{"x":[1],"y":"no"}]"#, Command::Majorize).unwrap_err();
        assert!(matches!(&err, CliError::Parse { location, .. } if location == "instance 1, field `y`"));
        assert_eq!(err.exit_code(), EXIT_PARSE);
    }

    #[test]
    fn csv_columns() {
        let pair = parse_csv("p,q\n0.5,0.25\n0.5,0.75\n").unwrap();
        assert_eq!(pair.q(), &[0.25, 0.75]);
        let err = parse_csv("0.5,0.25,1\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { .. }));
    }

    #[test]
    fn flags_parse() {
        assert_eq!("auto".parse::<ModulusChoice>(), Ok(ModulusChoice::Auto));
        assert_eq!("0.5".parse::<ModulusChoice>(), Ok(ModulusChoice::Explicit(0.5)));
        assert!("-1".parse::<ModulusChoice>().is_err());
        assert_eq!(parse_interval("0.1, 3"), Ok((0.1, 3.0)));
        assert!(parse_interval("1").is_err());
        assert_eq!("verify-identity".parse::<Command>(), Ok(Command::VerifyIdentity));
    }

    #[test]
    fn error_codes_are_distinct() {
        let codes = [
            CliError::parse("x", "y").exit_code(),
            CliError::Domain(Error::EmptyPoints).exit_code(),
            CliError::from(Error::QuadratureFailure {
                tolerance: 1.0,
                estimate: 2.0,
                max_subdivisions: 3,
            })
            .exit_code(),
        ];
        assert_eq!(codes, [EXIT_PARSE, EXIT_DOMAIN, EXIT_QUADRATURE]);
    }
}
