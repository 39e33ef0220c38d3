//! The RoPE oscillator bank: planar rotations, their complex-phasor
//! equivalent, and the relative-position similarity kernels.
//!
//! Channel `k` (1-indexed, as in the usual presentation) carries the angular
//! increment `theta_k = base^(-2(k-1)/d)`, stored highest frequency first.
//! All phases are computed as a single `p * theta` product in double
//! precision, so position scans up to 1e7 stay aliasing-free in this
//! reference path; accumulation semantics live in the `precision` module.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OscillatorError {
    #[error("base must be a finite real > 1, got {0}")]
    InvalidBase(f64),
    #[error("head_dim must be a positive even integer, got {0}")]
    InvalidHeadDim(usize),
    #[error("vector length {got} does not match head_dim {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("non-finite input value {0}")]
    NonFinite(f64),
    #[error("invalid frequency ladder: {0}")]
    InvalidFrequencies(&'static str),
}

/// The geometric frequency ladder for one RoPE configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorBank {
    base: f64,
    head_dim: usize,
    frequencies: Vec<f64>,
}

impl OscillatorBank {
    pub fn new(base: f64, head_dim: usize) -> Result<Self, OscillatorError> {
        let frequencies = channel_frequencies(base, head_dim)?;
        Ok(Self {
            base,
            head_dim,
            frequencies,
        })
    }

    /// Build a bank from an explicit frequency ladder, bypassing the
    /// geometric parameterization. Used for constructed banks with exact
    /// rational periods (e.g. periodicity analysis); the nominal base is
    /// taken as the reciprocal of the fundamental.
    pub fn from_frequencies(frequencies: Vec<f64>) -> Result<Self, OscillatorError> {
        if frequencies.is_empty() {
            return Err(OscillatorError::InvalidFrequencies("empty ladder"));
        }
        if frequencies.windows(2).any(|w| w[1] >= w[0]) {
            return Err(OscillatorError::InvalidFrequencies(
                "not strictly decreasing",
            ));
        }
        if frequencies
            .iter()
            .any(|t| !t.is_finite() || *t <= 0.0 || *t > 1.0)
        {
            return Err(OscillatorError::InvalidFrequencies("outside (0, 1]"));
        }
        let head_dim = 2 * frequencies.len();
        let base = 1.0 / frequencies.last().copied().expect("non-empty");
        Ok(Self {
            base,
            head_dim,
            frequencies,
        })
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn head_dim(&self) -> usize {
        self.head_dim
    }

    /// Angular increments in radians/token, highest frequency first.
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn num_channels(&self) -> usize {
        self.frequencies.len()
    }

    /// The slowest channel, `theta_min = base^(-(d-2)/d) ~ 1/base`.
    pub fn fundamental_frequency(&self) -> f64 {
        *self.frequencies.last().expect("bank has >= 1 channel")
    }
}

/// A position's phasor configuration across the bank: `e^{i p theta_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasorVector {
    pub position: u64,
    pub phasors: Vec<Complex64>,
}

/// `theta_k = base^(-2(k-1)/d)` for `k = 1..d/2`, strictly decreasing.
pub fn channel_frequencies(base: f64, head_dim: usize) -> Result<Vec<f64>, OscillatorError> {
    if !base.is_finite() || base <= 1.0 {
        return Err(OscillatorError::InvalidBase(base));
    }
    if head_dim == 0 || !head_dim.is_multiple_of(2) {
        return Err(OscillatorError::InvalidHeadDim(head_dim));
    }
    let d = head_dim as f64;
    Ok((0..head_dim / 2)
        .map(|k| base.powf(-2.0 * k as f64 / d))
        .collect())
}

/// Planar rotation of `(x, y)` by `angle` radians; norm-preserving.
pub fn rotate_pair(pair: [f64; 2], angle: f64) -> Result<[f64; 2], OscillatorError> {
    for v in pair.iter().chain(std::iter::once(&angle)) {
        if !v.is_finite() {
            return Err(OscillatorError::NonFinite(*v));
        }
    }
    let (sin, cos) = angle.sin_cos();
    Ok([pair[0] * cos - pair[1] * sin, pair[0] * sin + pair[1] * cos])
}

/// Rotate each feature pair of `vector` by `position * theta_k`.
pub fn rope_transform(
    vector: &[f64],
    position: u64,
    bank: &OscillatorBank,
) -> Result<Vec<f64>, OscillatorError> {
    if vector.len() != bank.head_dim() {
        return Err(OscillatorError::DimensionMismatch {
            got: vector.len(),
            expected: bank.head_dim(),
        });
    }
    let p = position as f64;
    let mut out = Vec::with_capacity(vector.len());
    for (pair, theta) in vector.chunks_exact(2).zip(bank.frequencies()) {
        let rotated = rotate_pair([pair[0], pair[1]], p * theta)?;
        out.extend_from_slice(&rotated);
    }
    Ok(out)
}

/// The bank's phasor configuration at `position`.
pub fn phasor_vector(position: u64, bank: &OscillatorBank) -> PhasorVector {
    let p = position as f64;
    PhasorVector {
        position,
        phasors: bank
            .frequencies()
            .iter()
            .map(|theta| Complex64::from_polar(1.0, p * theta))
            .collect(),
    }
}

/// Unit-amplitude positional similarity kernel `(2/d) * sum_k cos(delta * theta_k)`.
///
/// Isolates the positional factor of the attention dot product; amplitudes
/// `q_k conj(k_k)` are fixed at 1.
pub fn relative_kernel(delta: i64, bank: &OscillatorBank) -> f64 {
    let d = delta as f64;
    let sum: f64 = bank.frequencies().iter().map(|t| (d * t).cos()).sum();
    sum / bank.num_channels() as f64
}

/// Similarity of the fundamental (slowest) channel alone: `cos(delta / base)`.
///
/// This is the quasi-DC component that governs long-range alignment; its
/// first return to +1 at `delta = 2*pi*base` is the aliasing horizon.
pub fn fundamental_similarity(delta: i64, base: f64) -> f64 {
    (delta as f64 / base).cos()
}
