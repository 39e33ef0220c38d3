//! Analysis toolkit for rotary positional embedding (RoPE) base selection.
//!
//! RoPE encodes token position by rotating feature pairs through a bank of
//! geometrically spaced oscillators. Viewed as phase modulation, the base
//! parameter is pinned between a set of stability lower bounds (aliasing of
//! the fundamental oscillator, DC-component coherence, depth compounding)
//! and a floating-point upper bound (phase increments below machine epsilon
//! are erased). This crate evaluates those bounds in closed form, simulates
//! the phase behavior behind them, emulates reduced-precision rounding to
//! locate erasure dead zones, and audits real model configurations against
//! the resulting feasibility region.

pub mod audit;
pub mod bounds;
pub mod oscillator;
pub mod precision;
pub mod simulate;

pub use audit::{BatchOutcome, FeasibilityReport, ModelConfig, ReportStyle, Status};
pub use bounds::{FeasibilityRegion, StabilityParams};
pub use oscillator::{OscillatorBank, PhasorVector};
pub use precision::{DeadZoneReport, FloatFormat};
pub use simulate::{Curve, CurveFormat};
