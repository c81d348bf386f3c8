//! Rangefinder calibration: raw readings to the surface distance used as the
//! lever arm of the displacement equation.

use thiserror::Error;

use crate::types::OdometryConfig;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RangeError {
    #[error("raw range must be finite, got {0}")]
    NonFinite(f64),
    #[error("raw range must be >= 0, got {0}")]
    Negative(f64),
    #[error("calibration gain must be > 0 and finite, got {0}")]
    BadGain(f64),
}

/// Affine range calibration `r = gain * r_raw + offset`, clamped at zero.
///
/// Defaults to gain 1.07 and offset -100 cm, the constants the sensor was
/// calibrated with; both are configurable for recalibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeCalibration {
    pub gain: f64,
    pub offset_cm: f64,
}

impl Default for RangeCalibration {
    fn default() -> Self {
        Self {
            gain: 1.07,
            offset_cm: -100.0,
        }
    }
}

impl RangeCalibration {
    pub fn new(gain: f64, offset_cm: f64) -> Result<Self, RangeError> {
        if !(gain.is_finite() && gain > 0.0) {
            return Err(RangeError::BadGain(gain));
        }
        Ok(Self { gain, offset_cm })
    }

    pub fn from_config(config: &OdometryConfig) -> Self {
        Self {
            gain: config.range_gain,
            offset_cm: config.range_offset_cm,
        }
    }

    /// Calibrated surface distance in centimeters. A negative affine result
    /// is clamped to zero: a negative lever arm has no physical meaning.
    pub fn calibrate(&self, r_raw_cm: f64) -> Result<f64, RangeError> {
        if !r_raw_cm.is_finite() {
            return Err(RangeError::NonFinite(r_raw_cm));
        }
        if r_raw_cm < 0.0 {
            return Err(RangeError::Negative(r_raw_cm));
        }
        Ok((self.gain * r_raw_cm + self.offset_cm).max(0.0))
    }

    /// Raw reading that calibrates back to the given distance. Used by the
    /// simulator to emit raw values consistent with a known true range.
    pub fn invert(&self, r_cm: f64) -> f64 {
        (r_cm - self.offset_cm) / self.gain
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_constants_map_200_to_114_exactly() {
        let cal = RangeCalibration::default();
        assert_eq!(cal.calibrate(200.0).unwrap(), 114.0);
    }

    #[test]
    fn negative_affine_result_clamps_to_zero() {
        let cal = RangeCalibration::default();
        // 1.07 * 50 - 100 = -46.5 before the clamp.
        assert_eq!(cal.calibrate(50.0).unwrap(), 0.0);
    }

    #[test]
    fn identity_calibration_is_identity() {
        let cal = RangeCalibration::new(1.0, 0.0).unwrap();
        assert_eq!(cal.calibrate(123.4).unwrap(), 123.4);
        assert_eq!(cal.calibrate(0.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_invalid_inputs() {
        let cal = RangeCalibration::default();
        assert!(matches!(cal.calibrate(-1.0), Err(RangeError::Negative(_))));
        assert!(matches!(
            cal.calibrate(f64::NAN),
            Err(RangeError::NonFinite(_))
        ));
        assert!(matches!(
            cal.calibrate(f64::INFINITY),
            Err(RangeError::NonFinite(_))
        ));
        assert!(matches!(
            RangeCalibration::new(0.0, 5.0),
            Err(RangeError::BadGain(_))
        ));
    }

    #[test]
    fn invert_round_trips_through_calibrate() {
        let cal = RangeCalibration::default();
        let raw = cal.invert(214.0);
        let back = cal.calibrate(raw).unwrap();
        assert!((back - 214.0).abs() < 1e-9);
    }
}
