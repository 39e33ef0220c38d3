//! Reduced-precision rounding emulation and phase-erasure detection.
//!
//! The erasure test follows the accumulator form on the position ruler:
//! position `p` is erased when `fl(fl(p) + delta_theta)` rounds back to
//! `fl(p)`. Emulation covers mantissa rounding only (round-to-nearest,
//! ties-to-even); values outside a format's normal range are rejected,
//! subnormals are out of scope.

use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PrecisionError {
    #[error("value {value} is outside the normal range of {format}")]
    OutOfRange { value: f64, format: FloatFormat },
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("unknown float format {0:?} (expected BF16, FP16, FP32 or FP64)")]
    UnknownFormat(String),
    #[error("base must be > 1, got {0}")]
    InvalidBase(f64),
}

/// A floating-point format characterized by its explicit fraction width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FloatFormat {
    BF16,
    FP16,
    FP32,
    FP64,
}

impl FloatFormat {
    pub const ALL: [FloatFormat; 4] = [
        FloatFormat::BF16,
        FloatFormat::FP16,
        FloatFormat::FP32,
        FloatFormat::FP64,
    ];

    /// Explicit fraction bits (the implicit leading 1 is not counted).
    pub fn mantissa_bits(self) -> u32 {
        match self {
            FloatFormat::BF16 => 7,
            FloatFormat::FP16 => 10,
            FloatFormat::FP32 => 23,
            FloatFormat::FP64 => 52,
        }
    }

    /// `2^(-mantissa_bits)`, exact.
    pub fn machine_epsilon(self) -> f64 {
        2f64.powi(-(self.mantissa_bits() as i32))
    }

    /// Smallest normal exponent (unbiased).
    pub fn min_exponent(self) -> i32 {
        match self {
            FloatFormat::BF16 => -126,
            FloatFormat::FP16 => -14,
            FloatFormat::FP32 => -126,
            FloatFormat::FP64 => -1022,
        }
    }

    /// Largest normal exponent (unbiased).
    pub fn max_exponent(self) -> i32 {
        match self {
            FloatFormat::BF16 => 127,
            FloatFormat::FP16 => 15,
            FloatFormat::FP32 => 127,
            FloatFormat::FP64 => 1023,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FloatFormat::BF16 => "BF16",
            FloatFormat::FP16 => "FP16",
            FloatFormat::FP32 => "FP32",
            FloatFormat::FP64 => "FP64",
        }
    }
}

impl fmt::Display for FloatFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FloatFormat {
    type Err = PrecisionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "BF16" => Ok(FloatFormat::BF16),
            "FP16" => Ok(FloatFormat::FP16),
            "FP32" => Ok(FloatFormat::FP32),
            "FP64" => Ok(FloatFormat::FP64),
            _ => Err(PrecisionError::UnknownFormat(s.to_string())),
        }
    }
}

/// Round `x` to the nearest value representable with the format's mantissa
/// width (ties to even). Idempotent. Rejects values outside the normal range.
pub fn round_to_format(x: f64, format: FloatFormat) -> Result<f64, PrecisionError> {
    if !x.is_finite() {
        return Err(PrecisionError::NonFinite(x));
    }
    if x == 0.0 {
        return Ok(x);
    }
    let rounded = round_mantissa(x, format.mantissa_bits());
    let exp = exponent_of(rounded);
    if exp < format.min_exponent() || exp > format.max_exponent() {
        return Err(PrecisionError::OutOfRange { value: x, format });
    }
    Ok(rounded)
}

/// Unbiased binary exponent of a finite nonzero double.
fn exponent_of(x: f64) -> i32 {
    ((x.to_bits() >> 52) & 0x7ff) as i32 - 1023
}

/// Round the 52-bit significand of a double down to `bits` fraction bits,
/// round-to-nearest with ties to even. The carry out of the significand
/// propagates into the exponent through plain integer addition.
fn round_mantissa(x: f64, bits: u32) -> f64 {
    if bits >= 52 {
        return x;
    }
    let shift = 52 - bits;
    let b = x.to_bits();
    let lsb = (b >> shift) & 1;
    let rounded = b + ((1u64 << (shift - 1)) - 1 + lsb);
    f64::from_bits(rounded & !((1u64 << shift) - 1))
}

/// Like `round_to_format` but flushes magnitudes below the normal range to
/// zero instead of erroring; used by the distinguishability scan, where an
/// underflowed increment simply means "erased".
fn round_flushed(x: f64, format: FloatFormat) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let rounded = round_mantissa(x, format.mantissa_bits());
    if exponent_of(rounded) < format.min_exponent() {
        0.0
    } else {
        rounded
    }
}

/// True iff advancing the format's position ruler at `p` by `delta_theta`
/// lands on a different representable value: `fl(fl(p) + dt) != fl(p)`.
pub fn phase_step_distinguishable(p: f64, delta_theta: f64, format: FloatFormat) -> bool {
    let fp = round_flushed(p, format);
    round_flushed(fp + delta_theta, format) != fp
}

/// Smallest integer position `p <= scan_limit` where the fundamental
/// increment `1/base` is erased, or `None` if every scanned step survives.
pub fn erasure_onset(
    base: f64,
    format: FloatFormat,
    scan_limit: u64,
) -> Result<Option<u64>, PrecisionError> {
    if !base.is_finite() || base <= 1.0 {
        return Err(PrecisionError::InvalidBase(base));
    }
    let delta = 1.0 / base;
    Ok((0..=scan_limit).find(|&p| !phase_step_distinguishable(p as f64, delta, format)))
}

/// Run-length map of erased positions for one (base, format) pair.
#[derive(Debug, Clone, Serialize)]
pub struct DeadZoneReport {
    pub base: f64,
    pub format: FloatFormat,
    /// First erased position, if any run exists within the scan range.
    pub onset: Option<u64>,
    /// Disjoint, ordered `[start, end]` intervals of erased positions.
    pub runs: Vec<(u64, u64)>,
    pub scanned_to: u64,
}

impl DeadZoneReport {
    /// CSV with columns `run_start,run_end`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("run_start,run_end\n");
        for (start, end) in &self.runs {
            out.push_str(&format!("{start},{end}\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Scan positions `0..=scan_limit` and collect the intervals where the
/// fundamental increment `1/base` rounds away.
pub fn dead_zone_map(
    base: f64,
    format: FloatFormat,
    scan_limit: u64,
) -> Result<DeadZoneReport, PrecisionError> {
    if !base.is_finite() || base <= 1.0 {
        return Err(PrecisionError::InvalidBase(base));
    }
    let delta = 1.0 / base;
    let mut runs: Vec<(u64, u64)> = Vec::new();
    let mut current: Option<u64> = None;
    for p in 0..=scan_limit {
        if phase_step_distinguishable(p as f64, delta, format) {
            if let Some(start) = current.take() {
                runs.push((start, p - 1));
            }
        } else if current.is_none() {
            current = Some(p);
        }
    }
    if let Some(start) = current {
        runs.push((start, scan_limit));
    }
    Ok(DeadZoneReport {
        base,
        format,
        onset: runs.first().map(|r| r.0),
        runs,
        scanned_to: scan_limit,
    })
}
