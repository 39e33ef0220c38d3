//! Sampled-curve generators for the phase-modulation behavior behind the
//! bounds: aliasing of the fundamental oscillator, DC-component stability
//! across bases, depth-compounded decay, and precision-erasure indicators.
//!
//! Curves store raw trigonometric values, no smoothing. Exports are
//! deterministic: identical inputs yield byte-identical output.

use crate::oscillator::fundamental_similarity;
use crate::precision::{self, FloatFormat, PrecisionError};
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::io::{self, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error("base must be > 1, got {0}")]
    InvalidBase(f64),
    #[error(transparent)]
    Precision(#[from] PrecisionError),
    #[error("failed to write {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("malformed curve data: {0}")]
    Parse(String),
}

/// A sampled (position, value) series with free-form metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub label: String,
    pub samples: Vec<(u64, f64)>,
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveFormat {
    Csv,
    Json,
}

/// Sample cap applied when auto-coarsening strides.
const MAX_SAMPLES: u64 = 1_000_000;

/// Stride 1 up to 1e5 positions, then coarsened to keep the sample count
/// at or below `MAX_SAMPLES`.
pub fn auto_stride(max_position: u64) -> u64 {
    if max_position <= 100_000 {
        1
    } else {
        max_position.div_ceil(MAX_SAMPLES).max(1)
    }
}

fn check_base(base: f64) -> Result<(), SimulateError> {
    if !base.is_finite() || base <= 1.0 {
        return Err(SimulateError::InvalidBase(base));
    }
    Ok(())
}

/// Fundamental-channel similarity `cos(delta/base)` over strided offsets.
/// Metadata records the analytic spike location `2*pi*base`.
pub fn aliasing_scan(base: f64, max_position: u64, stride: u64) -> Result<Curve, SimulateError> {
    check_base(base)?;
    let stride = stride.max(1);
    let samples = (0..=max_position)
        .step_by(stride as usize)
        .map(|p| (p, fundamental_similarity(p as i64, base)))
        .collect();
    let mut metadata = BTreeMap::new();
    metadata.insert("base".into(), format_f64(base));
    metadata.insert("stride".into(), stride.to_string());
    metadata.insert("analytic_spike".into(), format_f64(TAU * base));
    Ok(Curve {
        label: format!("aliasing_base_{base}"),
        samples,
        metadata,
    })
}

/// Position of the global post-zero maximum in an aliasing curve, if any.
pub fn locate_spike(curve: &Curve) -> Option<(u64, f64)> {
    curve
        .samples
        .iter()
        .filter(|(p, _)| *p > 0)
        .cloned()
        .max_by(|a, b| a.1.total_cmp(&b.1))
}

/// One `cos(p/base)` curve per base over `[0, max_position]`, lowest-frequency
/// channel only.
pub fn dc_stability_scan(bases: &[f64], max_position: u64) -> Result<Vec<Curve>, SimulateError> {
    let stride = auto_stride(max_position);
    bases
        .iter()
        .map(|&base| {
            check_base(base)?;
            let samples = (0..=max_position)
                .step_by(stride as usize)
                .map(|p| (p, (p as f64 / base).cos()))
                .collect();
            let mut metadata = BTreeMap::new();
            metadata.insert("base".into(), format_f64(base));
            metadata.insert("stride".into(), stride.to_string());
            // the paper-facing rotation count at the end of the scan
            metadata.insert(
                "full_rotations".into(),
                format_f64(max_position as f64 / base / TAU),
            );
            Ok(Curve {
                label: format!("dc_base_{base}"),
                samples,
                metadata,
            })
        })
        .collect()
}

/// One `cos(p/base)^N` curve per layer count; signed real exponentiation,
/// so odd N preserves the sign of the cosine.
pub fn depth_decay_scan(
    base: f64,
    layer_counts: &[u32],
    max_position: u64,
) -> Result<Vec<Curve>, SimulateError> {
    check_base(base)?;
    let stride = auto_stride(max_position);
    Ok(layer_counts
        .iter()
        .map(|&n| {
            let samples = (0..=max_position)
                .step_by(stride as usize)
                .map(|p| (p, signed_pow((p as f64 / base).cos(), n)))
                .collect();
            let mut metadata = BTreeMap::new();
            metadata.insert("base".into(), format_f64(base));
            metadata.insert("layers".into(), n.to_string());
            metadata.insert("stride".into(), stride.to_string());
            Curve {
                label: format!("depth_base_{base}_n_{n}"),
                samples,
                metadata,
            }
        })
        .collect())
}

fn signed_pow(x: f64, n: u32) -> f64 {
    x.powi(n as i32)
}

/// Indicator curve: 1 where position p is distinguishable from its
/// successor on the format's ruler, 0 where the step is erased.
pub fn precision_erasure_scan(
    base: f64,
    format: FloatFormat,
    max_position: u64,
) -> Result<Curve, SimulateError> {
    check_base(base)?;
    let delta = 1.0 / base;
    let stride = auto_stride(max_position);
    let samples = (0..=max_position)
        .step_by(stride as usize)
        .map(|p| {
            let distinguishable = precision::phase_step_distinguishable(p as f64, delta, format);
            (p, if distinguishable { 1.0 } else { 0.0 })
        })
        .collect();
    let mut metadata = BTreeMap::new();
    metadata.insert("base".into(), format_f64(base));
    metadata.insert("format".into(), format.name().to_string());
    metadata.insert("stride".into(), stride.to_string());
    Ok(Curve {
        label: format!("erasure_base_{base}_{}", format.name()),
        samples,
        metadata,
    })
}

/// Shortest decimal representation that round-trips, locale-independent.
fn format_f64(v: f64) -> String {
    format!("{v}")
}

/// Write a curve as CSV (`# key=value` comment lines, then
/// `position,value` rows) or as JSON mirroring the fields.
pub fn export_curve<W: Write>(curve: &Curve, dest: &mut W, format: CurveFormat) -> io::Result<()> {
    match format {
        CurveFormat::Csv => {
            writeln!(dest, "# label={}", curve.label)?;
            for (k, v) in &curve.metadata {
                writeln!(dest, "# {k}={v}")?;
            }
            writeln!(dest, "position,value")?;
            for (p, v) in &curve.samples {
                writeln!(dest, "{p},{}", format_f64(*v))?;
            }
            Ok(())
        }
        CurveFormat::Json => {
            let text = serde_json::to_string_pretty(curve).expect("curve serializes");
            dest.write_all(text.as_bytes())?;
            dest.write_all(b"\n")
        }
    }
}

/// Export to a file; I/O failures carry the destination path.
pub fn export_curve_to_path(
    curve: &Curve,
    path: &Path,
    format: CurveFormat,
) -> Result<(), SimulateError> {
    let mut file = std::fs::File::create(path).map_err(|source| SimulateError::Io {
        path: path.display().to_string(),
        source,
    })?;
    export_curve(curve, &mut file, format).map_err(|source| SimulateError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parse a curve back from its CSV export.
pub fn parse_curve_csv(text: &str) -> Result<Curve, SimulateError> {
    let mut label = String::new();
    let mut metadata = BTreeMap::new();
    let mut samples = Vec::new();
    let mut seen_header = false;
    for line in text.lines() {
        if let Some(comment) = line.strip_prefix("# ").or_else(|| line.strip_prefix("#")) {
            let (k, v) = comment
                .split_once('=')
                .ok_or_else(|| SimulateError::Parse(format!("bad metadata line: {line}")))?;
            if k == "label" {
                label = v.to_string();
            } else {
                metadata.insert(k.to_string(), v.to_string());
            }
        } else if !seen_header {
            if line != "position,value" {
                return Err(SimulateError::Parse(format!("bad header: {line}")));
            }
            seen_header = true;
        } else if !line.is_empty() {
            let (p, v) = line
                .split_once(',')
                .ok_or_else(|| SimulateError::Parse(format!("bad sample row: {line}")))?;
            let p: u64 = p
                .parse()
                .map_err(|_| SimulateError::Parse(format!("bad position: {p}")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| SimulateError::Parse(format!("bad value: {v}")))?;
            samples.push((p, v));
        }
    }
    Ok(Curve {
        label,
        samples,
        metadata,
    })
}
