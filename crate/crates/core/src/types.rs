//! Sensor-sample and configuration domain types shared across the crate.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Default flow-quality gate threshold. Readings at or above this score are
/// trusted directly; anything below is treated as a dropout.
pub const DEFAULT_QUALITY_THRESHOLD: u8 = 100;

/// Validation failures for individual sensor samples and records.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TypeError {
    #[error("field `{field}` must be finite, got {value}")]
    NonFinite { field: &'static str, value: f64 },
    #[error("field `r_raw_cm` must be >= 0, got {value}")]
    NegativeRange { value: f64 },
    #[error("flow timestamp {flow_t_us} us does not match range timestamp {range_t_us} us")]
    TimestampMismatch { flow_t_us: u64, range_t_us: u64 },
}

/// One optical-flow readout: angular flow accumulated per axis since the
/// previous readout, plus the sensor's quality self-assessment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSample {
    /// Timestamp in microseconds. Strictly increasing within a stream.
    pub t_us: u64,
    /// Accumulated angular flow about x since the previous readout, radians.
    pub theta_x_rad: f64,
    /// Accumulated angular flow about y since the previous readout, radians.
    pub theta_y_rad: f64,
    /// Flow-quality score in [0, 255].
    pub quality: u8,
}

impl FlowSample {
    pub fn validate(&self) -> Result<(), TypeError> {
        if !self.theta_x_rad.is_finite() {
            return Err(TypeError::NonFinite {
                field: "theta_x_rad",
                value: self.theta_x_rad,
            });
        }
        if !self.theta_y_rad.is_finite() {
            return Err(TypeError::NonFinite {
                field: "theta_y_rad",
                value: self.theta_y_rad,
            });
        }
        Ok(())
    }
}

/// One rangefinder readout: raw distance to the observed surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeSample {
    /// Timestamp in microseconds. Strictly increasing within a stream.
    pub t_us: u64,
    /// Raw distance reading in centimeters, before calibration. Never negative.
    pub r_raw_cm: f64,
}

impl RangeSample {
    pub fn validate(&self) -> Result<(), TypeError> {
        if !self.r_raw_cm.is_finite() {
            return Err(TypeError::NonFinite {
                field: "r_raw_cm",
                value: self.r_raw_cm,
            });
        }
        if self.r_raw_cm < 0.0 {
            return Err(TypeError::NegativeRange {
                value: self.r_raw_cm,
            });
        }
        Ok(())
    }
}

/// A synchronized flow + range pair sharing one timestamp. This is the unit
/// the log format stores per row and the pipeline consumes per step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorRecord {
    pub flow: FlowSample,
    pub range: RangeSample,
}

impl SensorRecord {
    /// Pairs a flow and a range sample, rejecting mismatched timestamps.
    pub fn new(flow: FlowSample, range: RangeSample) -> Result<Self, TypeError> {
        if flow.t_us != range.t_us {
            return Err(TypeError::TimestampMismatch {
                flow_t_us: flow.t_us,
                range_t_us: range.t_us,
            });
        }
        flow.validate()?;
        range.validate()?;
        Ok(Self { flow, range })
    }

    /// Builds a record straight from field values, validating invariants.
    pub fn from_values(
        t_us: u64,
        theta_x_rad: f64,
        theta_y_rad: f64,
        quality: u8,
        r_raw_cm: f64,
    ) -> Result<Self, TypeError> {
        Self::new(
            FlowSample {
                t_us,
                theta_x_rad,
                theta_y_rad,
                quality,
            },
            RangeSample { t_us, r_raw_cm },
        )
    }

    pub fn t_us(&self) -> u64 {
        self.flow.t_us
    }
}

/// How the per-entry extrapolated velocities are collapsed into one
/// predicted velocity during a dropout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    /// Arithmetic mean of every extrapolated velocity in the window.
    #[default]
    Mean,
    /// The extrapolation from the most recent entry that carries a fitted
    /// acceleration (the newest entry itself always has acceleration zero).
    LastFit,
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Aggregation::Mean => write!(f, "mean"),
            Aggregation::LastFit => write!(f, "last_fit"),
        }
    }
}

impl FromStr for Aggregation {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean" => Ok(Aggregation::Mean),
            "last_fit" => Ok(Aggregation::LastFit),
            other => Err(ConfigError::UnknownAggregation(other.to_string())),
        }
    }
}

/// Invalid configuration values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("window_len must be >= 1")]
    ZeroWindow,
    #[error("range_gain must be > 0 and finite, got {0}")]
    BadGain(f64),
    #[error("range_offset_cm must be finite, got {0}")]
    BadOffset(f64),
    #[error("max_prediction_horizon_s must be > 0 and finite, got {0}")]
    BadHorizon(f64),
    #[error("unknown aggregation `{0}` (expected `mean` or `last_fit`)")]
    UnknownAggregation(String),
}

/// Tuning knobs for the odometry pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct OdometryConfig {
    /// Flow-quality gate: quality >= threshold is trusted as a measurement.
    pub quality_threshold: u8,
    /// Capacity of the good-velocity window the predictor draws from.
    pub window_len: usize,
    /// Range calibration gain (dimensionless).
    pub range_gain: f64,
    /// Range calibration offset in centimeters.
    pub range_offset_cm: f64,
    /// Maximum time past the last good sample for which linear extrapolation
    /// is trusted; beyond it the predicted velocity freezes to zero.
    pub max_prediction_horizon_s: f64,
    /// Aggregation mode for the predictor.
    pub aggregation: Aggregation,
}

impl Default for OdometryConfig {
    fn default() -> Self {
        Self {
            quality_threshold: DEFAULT_QUALITY_THRESHOLD,
            window_len: 8,
            range_gain: 1.07,
            range_offset_cm: -100.0,
            max_prediction_horizon_s: 2.0,
            aggregation: Aggregation::Mean,
        }
    }
}

impl OdometryConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.window_len == 0 {
            return Err(ConfigError::ZeroWindow);
        }
        if !(self.range_gain.is_finite() && self.range_gain > 0.0) {
            return Err(ConfigError::BadGain(self.range_gain));
        }
        if !self.range_offset_cm.is_finite() {
            return Err(ConfigError::BadOffset(self.range_offset_cm));
        }
        if !(self.max_prediction_horizon_s.is_finite() && self.max_prediction_horizon_s > 0.0) {
            return Err(ConfigError::BadHorizon(self.max_prediction_horizon_s));
        }
        Ok(())
    }
}
