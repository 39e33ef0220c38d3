//! Model-configuration auditing: parse deployed configs, evaluate them
//! against the stability and precision bounds, classify each one, and
//! render machine-readable reports.

use crate::bounds::{
    aliasing_lower_bound, depth_lower_bound, precision_upper_bound, BoundsError, StabilityParams,
};
use crate::precision::{self, FloatFormat, PrecisionError};
use serde::Serialize;
use serde_json::Value;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Precision(#[from] PrecisionError),
}

fn field_err(path: impl Into<String>, message: impl Into<String>) -> AuditError {
    AuditError::Field {
        path: path.into(),
        message: message.into(),
    }
}

/// One audited model configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelConfig {
    pub name: String,
    pub num_layers: u32,
    pub context_length: u64,
    pub nominal_base: f64,
    /// Post-scaling base (e.g. YaRN-adjusted); `None` means the nominal
    /// base is deployed as-is.
    pub effective_base: Option<f64>,
    pub precision: FloatFormat,
    pub head_dim: usize,
    /// Carried reference data (e.g. a published empirical lower bound);
    /// never computed here.
    pub reference_empirical_bound: Option<f64>,
    pub notes: Option<String>,
}

impl ModelConfig {
    /// The base the model actually runs with.
    pub fn effective_base(&self) -> f64 {
        self.effective_base.unwrap_or(self.nominal_base)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Stable,
    Unstable,
    Infeasible,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Stable => "Stable",
            Status::Unstable => "Unstable",
            Status::Infeasible => "Infeasible",
        })
    }
}

/// Bounds, classification, and diagnostics for one config.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub config: ModelConfig,
    pub epsilon: f64,
    pub aliasing_bound: f64,
    pub dc_depth_bound: f64,
    pub min_base: f64,
    pub max_base: f64,
    pub status: Status,
    /// `effective_base / min_base`; above 1 means the deployed base clears
    /// the stability minimum.
    pub margin: f64,
    /// First position (up to the context length) where the fundamental
    /// phase increment is erased under the config's precision.
    pub erasure_onset: Option<u64>,
}

fn get_field<'a>(obj: &'a serde_json::Map<String, Value>, key: &str) -> Option<&'a Value> {
    obj.get(key).filter(|v| !v.is_null())
}

fn require_positive_int(
    obj: &serde_json::Map<String, Value>,
    key: &str,
) -> Result<u64, AuditError> {
    let v = get_field(obj, key).ok_or_else(|| field_err(key, "missing required field"))?;
    let n = v
        .as_i64()
        .ok_or_else(|| field_err(key, format!("expected an integer, got {v}")))?;
    if n <= 0 {
        return Err(field_err(key, format!("must be positive, got {n}")));
    }
    Ok(n as u64)
}

fn optional_positive_number(
    obj: &serde_json::Map<String, Value>,
    key: &str,
) -> Result<Option<f64>, AuditError> {
    match get_field(obj, key) {
        None => Ok(None),
        Some(v) => {
            let x = v
                .as_f64()
                .ok_or_else(|| field_err(key, format!("expected a number, got {v}")))?;
            if x <= 0.0 {
                return Err(field_err(key, format!("must be positive, got {x}")));
            }
            Ok(Some(x))
        }
    }
}

fn parse_config_value(value: &Value) -> Result<ModelConfig, AuditError> {
    let obj = value
        .as_object()
        .ok_or_else(|| field_err("$", "expected a JSON object"))?;

    let name = get_field(obj, "name")
        .ok_or_else(|| field_err("name", "missing required field"))?
        .as_str()
        .ok_or_else(|| field_err("name", "expected a string"))?
        .to_string();

    let num_layers = require_positive_int(obj, "num_layers")?;
    let context_length = require_positive_int(obj, "context_length")?;

    let nominal_base = optional_positive_number(obj, "nominal_base")?
        .ok_or_else(|| field_err("nominal_base", "missing required field"))?;
    if nominal_base <= 1.0 {
        return Err(field_err(
            "nominal_base",
            format!("must be > 1, got {nominal_base}"),
        ));
    }

    let precision_name = get_field(obj, "precision")
        .ok_or_else(|| field_err("precision", "missing required field"))?
        .as_str()
        .ok_or_else(|| field_err("precision", "expected a string"))?;
    let precision: FloatFormat = precision_name
        .parse()
        .map_err(|e| field_err("precision", format!("{e}")))?;

    let effective_base = optional_positive_number(obj, "effective_base")?;
    if let Some(eff) = effective_base {
        if eff <= 1.0 {
            return Err(field_err(
                "effective_base",
                format!("must be > 1, got {eff}"),
            ));
        }
    }

    let head_dim = match get_field(obj, "head_dim") {
        None => 128,
        Some(v) => {
            let n = v
                .as_i64()
                .ok_or_else(|| field_err("head_dim", format!("expected an integer, got {v}")))?;
            if n <= 0 || n % 2 != 0 {
                return Err(field_err(
                    "head_dim",
                    format!("must be a positive even integer, got {n}"),
                ));
            }
            n as usize
        }
    };

    let reference_empirical_bound = optional_positive_number(obj, "reference_empirical_bound")?;
    let notes = match get_field(obj, "notes") {
        None => None,
        Some(v) => Some(
            v.as_str()
                .ok_or_else(|| field_err("notes", "expected a string"))?
                .to_string(),
        ),
    };

    Ok(ModelConfig {
        name,
        num_layers: num_layers as u32,
        context_length,
        nominal_base,
        effective_base,
        precision,
        head_dim,
        reference_empirical_bound,
        notes,
    })
}

/// Parse a single config object from JSON text.
pub fn parse_model_config(document: &str) -> Result<ModelConfig, AuditError> {
    let value: Value = serde_json::from_str(document)?;
    parse_config_value(&value)
}

/// Parse a JSON array of configs. The outer `Err` covers malformed JSON;
/// per-element failures are returned in place so one bad entry does not
/// abort the batch.
pub fn parse_model_batch(
    document: &str,
) -> Result<Vec<Result<ModelConfig, AuditError>>, AuditError> {
    let value: Value = serde_json::from_str(document)?;
    let items = value
        .as_array()
        .ok_or_else(|| field_err("$", "expected a JSON array of config objects"))?;
    Ok(items
        .iter()
        .map(|item| {
            parse_config_value(item).map_err(|e| match item.get("name").and_then(Value::as_str) {
                Some(name) => field_err(name.to_string(), format!("{e}")),
                None => e,
            })
        })
        .collect())
}

/// Evaluate one config against all bounds at coherence threshold `epsilon`.
pub fn evaluate_model(config: &ModelConfig, epsilon: f64) -> Result<FeasibilityReport, AuditError> {
    let params = StabilityParams::new(config.context_length, epsilon, config.num_layers)?;
    let aliasing = aliasing_lower_bound(config.context_length);
    let dc_depth = depth_lower_bound(&params);
    let min_base = aliasing.max(dc_depth);
    let max_base = precision_upper_bound(config.precision);
    let effective = config.effective_base();

    let status = if min_base >= max_base {
        Status::Infeasible
    } else if effective >= min_base && effective < max_base {
        Status::Stable
    } else {
        Status::Unstable
    };

    let erasure_onset =
        precision::erasure_onset(effective, config.precision, config.context_length)?;

    Ok(FeasibilityReport {
        config: config.clone(),
        epsilon,
        aliasing_bound: aliasing,
        dc_depth_bound: dc_depth,
        min_base,
        max_base,
        status,
        margin: effective / min_base,
        erasure_onset,
    })
}

/// Reports plus per-config errors from a mixed batch.
#[derive(Debug)]
pub struct BatchOutcome {
    pub reports: Vec<FeasibilityReport>,
    pub errors: Vec<String>,
}

/// Evaluate parsed configs in order.
pub fn audit_batch(
    configs: &[ModelConfig],
    epsilon: f64,
) -> Result<Vec<FeasibilityReport>, AuditError> {
    configs.iter().map(|c| evaluate_model(c, epsilon)).collect()
}

/// Parse and evaluate a JSON document holding either one config object or
/// an array of them; invalid entries are collected, not fatal.
pub fn audit_documents(document: &str, epsilon: f64) -> Result<BatchOutcome, AuditError> {
    let value: Value = serde_json::from_str(document)?;
    let parsed: Vec<Result<ModelConfig, AuditError>> = if value.is_array() {
        parse_model_batch(document)?
    } else {
        vec![parse_config_value(&value)]
    };
    let mut reports = Vec::new();
    let mut errors = Vec::new();
    for item in parsed {
        match item.and_then(|c| evaluate_model(&c, epsilon)) {
            Ok(report) => reports.push(report),
            Err(e) => errors.push(e.to_string()),
        }
    }
    Ok(BatchOutcome { reports, errors })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportStyle {
    Markdown,
    Csv,
    Json,
}

/// Integer rendering with thousands separators, for markdown tables.
fn grouped(v: f64) -> String {
    let rounded = v.round() as i128;
    let digits = rounded.unsigned_abs().to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    if rounded < 0 {
        format!("-{out}")
    } else {
        out
    }
}

/// Render reports as a markdown table, raw CSV, or JSON. Deterministic.
pub fn render_report(reports: &[FeasibilityReport], style: ReportStyle) -> String {
    match style {
        ReportStyle::Markdown => {
            let mut out = String::from(
                "| Model | Layers | Context | Actual Base | Aliasing | DC Stability | Min Base | Max Base | Status | Margin |\n\
                 |---|---|---|---|---|---|---|---|---|---|\n",
            );
            for r in reports {
                out.push_str(&format!(
                    "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {:.3} |\n",
                    r.config.name,
                    r.config.num_layers,
                    grouped(r.config.context_length as f64),
                    grouped(r.config.effective_base()),
                    grouped(r.aliasing_bound),
                    grouped(r.dc_depth_bound),
                    grouped(r.min_base),
                    grouped(r.max_base),
                    r.status,
                    r.margin,
                ));
            }
            out
        }
        ReportStyle::Csv => {
            let mut out = String::from(
                "model,layers,context,actual_base,aliasing,dc_stability,min_base,max_base,status,margin\n",
            );
            for r in reports {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    r.config.name,
                    r.config.num_layers,
                    r.config.context_length,
                    r.config.effective_base(),
                    r.aliasing_bound,
                    r.dc_depth_bound,
                    r.min_base,
                    r.max_base,
                    r.status,
                    r.margin,
                ));
            }
            out
        }
        ReportStyle::Json => {
            let mut text = serde_json::to_string_pretty(reports).expect("reports serialize");
            text.push('\n');
            text
        }
    }
}
