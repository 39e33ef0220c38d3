//! Closed-form lower and upper bounds on the RoPE base and the feasibility
//! region between them.
//!
//! Lower bounds: the fundamental aliasing limit `L/(2*pi)`, the DC-component
//! stability limit `L/arccos(eps)`, and its depth-compounded form
//! `L/arccos(eps^(1/N))`. Upper bound: the precision wall `1/eps_mach`.
//! Bounds are returned as reals; callers round for presentation only.

use crate::precision::FloatFormat;
use serde::Serialize;
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("context_length must be >= 1")]
    InvalidContextLength,
    #[error("coherence_threshold must lie in the open interval (0, 1), got {0}")]
    InvalidCoherence(f64),
    #[error("num_layers must be >= 1")]
    InvalidLayers,
    #[error("effective length must be positive and finite, got {0}")]
    InvalidEffectiveLength(f64),
    #[error("base must be > 1, got {0}")]
    InvalidBase(f64),
}

/// Inputs to the stability bounds: target context, coherence threshold,
/// and transformer depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityParams {
    pub context_length: u64,
    pub coherence_threshold: f64,
    pub num_layers: u32,
}

impl StabilityParams {
    pub fn new(
        context_length: u64,
        coherence_threshold: f64,
        num_layers: u32,
    ) -> Result<Self, BoundsError> {
        if context_length == 0 {
            return Err(BoundsError::InvalidContextLength);
        }
        validate_coherence(coherence_threshold)?;
        if num_layers == 0 {
            return Err(BoundsError::InvalidLayers);
        }
        Ok(Self {
            context_length,
            coherence_threshold,
            num_layers,
        })
    }
}

/// Admissible base interval `(lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityRegion {
    pub lower: f64,
    pub upper: f64,
    pub non_empty: bool,
}

impl FeasibilityRegion {
    pub fn contains(&self, base: f64) -> bool {
        self.non_empty && base >= self.lower && base < self.upper
    }

    pub fn midpoint(&self) -> f64 {
        (self.lower + self.upper) / 2.0
    }
}

fn validate_coherence(eps: f64) -> Result<(), BoundsError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(BoundsError::InvalidCoherence(eps));
    }
    Ok(())
}

/// `arccos` with a series fallback near 1 to avoid cancellation: for
/// `x = 1 - t` with `t < 1e-8`, `arccos(1-t) ~ sqrt(2t) * (1 + t/12)`.
/// Deep-N inputs push `eps^(1/N)` within 1e-9 of 1, where the libm path
/// loses relative accuracy.
pub(crate) fn stable_acos(x: f64) -> f64 {
    let t = 1.0 - x;
    if t > 0.0 && t < 1e-8 {
        (2.0 * t).sqrt() * (1.0 + t / 12.0)
    } else {
        x.acos()
    }
}

/// Theorem-1 aliasing limit: `base > L / (2*pi)`.
pub fn aliasing_lower_bound(context_length: u64) -> f64 {
    context_length as f64 / TAU
}

/// Theorem-2 single-layer DC stability limit: `base >= L / arccos(eps)`.
pub fn dc_lower_bound(context_length: u64, eps: f64) -> Result<f64, BoundsError> {
    validate_coherence(eps)?;
    Ok(context_length as f64 / stable_acos(eps))
}

/// Theorem-3 depth-compounded stability limit: `base >= L / arccos(eps^(1/N))`.
pub fn depth_lower_bound(params: &StabilityParams) -> f64 {
    let per_layer = params
        .coherence_threshold
        .powf(1.0 / params.num_layers as f64);
    params.context_length as f64 / stable_acos(per_layer)
}

/// Theorem-4 combined lower bound: max of aliasing and depth limits.
pub fn combined_lower_bound(params: &StabilityParams) -> f64 {
    aliasing_lower_bound(params.context_length).max(depth_lower_bound(params))
}

/// Theorem-5 precision wall: `base < 1 / eps_mach`.
pub fn precision_upper_bound(format: FloatFormat) -> f64 {
    1.0 / format.machine_epsilon()
}

/// The admissible interval between the combined lower bound and the
/// precision wall.
pub fn feasibility_region(params: &StabilityParams, format: FloatFormat) -> FeasibilityRegion {
    let lower = combined_lower_bound(params);
    let upper = precision_upper_bound(format);
    FeasibilityRegion {
        lower,
        upper,
        non_empty: lower < upper,
    }
}

/// Largest context length satisfying both lower bounds at a fixed base:
/// `base * min(2*pi, arccos(eps^(1/N)))`.
pub fn max_context_for_base(base: f64, eps: f64, num_layers: u32) -> Result<f64, BoundsError> {
    if !base.is_finite() || base <= 1.0 {
        return Err(BoundsError::InvalidBase(base));
    }
    validate_coherence(eps)?;
    if num_layers == 0 {
        return Err(BoundsError::InvalidLayers);
    }
    let per_layer = eps.powf(1.0 / num_layers as f64);
    Ok(base * TAU.min(stable_acos(per_layer)))
}

/// Theorem 4 with the nominal length replaced by an effective length
/// `f(L)`, as under YaRN-style position remapping. `f` itself is supplied
/// by the caller as a value.
pub fn yarn_adjusted_bound(
    effective_length: f64,
    eps: f64,
    num_layers: u32,
) -> Result<f64, BoundsError> {
    if !effective_length.is_finite() || effective_length <= 0.0 {
        return Err(BoundsError::InvalidEffectiveLength(effective_length));
    }
    validate_coherence(eps)?;
    if num_layers == 0 {
        return Err(BoundsError::InvalidLayers);
    }
    let per_layer = eps.powf(1.0 / num_layers as f64);
    Ok((effective_length / TAU).max(effective_length / stable_acos(per_layer)))
}

/// `1 / arccos(eps)`: the context-length multiplier a coherence threshold
/// imposes on the minimum base.
pub fn coherence_multiplier(eps: f64) -> Result<f64, BoundsError> {
    validate_coherence(eps)?;
    Ok(1.0 / stable_acos(eps))
}

/// Default coherence threshold; `ROPE_EPSILON_DEFAULT` may override it at
/// the CLI layer.
pub const DEFAULT_EPSILON: f64 = 0.95;
