//! Core displacement math: angular flow times lever arm, and the velocity
//! form used by the quality gate and the predictor.
//!
//! All distances here are meters; calibrated centimeters are converted at
//! the pipeline boundary so the core math lives in one unit system.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("readout interval must be > 0 s, got {0} (duplicate or non-monotonic timestamps)")]
    NonPositiveInterval(f64),
}

/// Linear displacement covered by an accumulated angular flow `theta` seen
/// at surface distance `lever_arm_m`: `s = theta * r`.
pub fn displacement_increment(theta_rad: f64, lever_arm_m: f64) -> f64 {
    debug_assert!(theta_rad.is_finite());
    debug_assert!(lever_arm_m.is_finite() && lever_arm_m >= 0.0);
    theta_rad * lever_arm_m
}

/// Average velocity over one readout interval: `(theta * r) / dt`.
pub fn velocity_from_flow(theta_rad: f64, lever_arm_m: f64, dt_s: f64) -> Result<f64, FlowError> {
    if !(dt_s.is_finite() && dt_s > 0.0) {
        return Err(FlowError::NonPositiveInterval(dt_s));
    }
    Ok(displacement_increment(theta_rad, lever_arm_m) / dt_s)
}
