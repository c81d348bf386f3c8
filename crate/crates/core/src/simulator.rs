//! Deterministic synthetic sensor streams with analytic ground truth.
//!
//! Streams are a pure function of (profile, scenario, calibration, seed).
//! Randomness comes from a ChaCha8 generator seeded with the given value;
//! Gaussian noise is drawn with the Box-Muller transform on top of it, so a
//! stream is reproducible from the seed alone.
//!
//! Dropouts model the flow sensor's failure mode on poor surfaces: affected
//! samples report exactly zero flow with a low quality score. Dropouts come
//! in bursts driven by a two-state chain whose burst lengths are geometric
//! with mean `dropout_burst_mean` and whose stationary per-sample dropout
//! probability is `p_dropout`. The chain starts in the good state, so every
//! stream with `p_dropout < 1` opens with at least one good sample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::logfile::TruthPoint;
use crate::range::RangeCalibration;
use crate::types::{SensorRecord, DEFAULT_QUALITY_THRESHOLD};

const MICROS_PER_SEC: f64 = 1_000_000.0;
/// Timestamps are integer microseconds; cap the rate so consecutive sample
/// times can never collide after rounding.
pub const MAX_SAMPLE_RATE_HZ: f64 = 100_000.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid motion profile: {0}")]
    Profile(String),
    #[error("invalid scenario `{name}`: {reason}")]
    Scenario { name: String, reason: String },
    #[error(
        "scenario `{name}`: true range {r_cm} cm maps to a negative raw reading \
         under the given calibration"
    )]
    UninvertibleRange { name: String, r_cm: f64 },
}

/// Trajectory shape along the x axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MotionKind {
    /// Fixed speed for the whole run.
    ConstantVelocity { speed_mps: f64 },
    /// Ramp at `accel` from rest to `cruise`, then hold it.
    Trapezoidal { accel_mps2: f64, cruise_mps: f64 },
    /// Position oscillates as `amplitude * sin(2*pi*t / period)`.
    Sinusoidal { amplitude_m: f64, period_s: f64 },
}

/// Sampled motion profile: a trajectory plus duration and sample rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionProfile {
    pub kind: MotionKind,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
}

impl MotionProfile {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(SimError::Profile(format!(
                "duration must be > 0 s, got {}",
                self.duration_s
            )));
        }
        if !(self.sample_rate_hz.is_finite()
            && self.sample_rate_hz > 0.0
            && self.sample_rate_hz <= MAX_SAMPLE_RATE_HZ)
        {
            return Err(SimError::Profile(format!(
                "sample rate must be in (0, {MAX_SAMPLE_RATE_HZ}] Hz, got {}",
                self.sample_rate_hz
            )));
        }
        match self.kind {
            MotionKind::ConstantVelocity { speed_mps } => {
                if !speed_mps.is_finite() {
                    return Err(SimError::Profile("speed must be finite".into()));
                }
            }
            MotionKind::Trapezoidal {
                accel_mps2,
                cruise_mps,
            } => {
                if !(accel_mps2.is_finite() && accel_mps2 > 0.0) {
                    return Err(SimError::Profile(format!(
                        "trapezoid accel must be > 0, got {accel_mps2}"
                    )));
                }
                if !(cruise_mps.is_finite() && cruise_mps >= 0.0) {
                    return Err(SimError::Profile(format!(
                        "trapezoid cruise speed must be >= 0, got {cruise_mps}"
                    )));
                }
            }
            MotionKind::Sinusoidal {
                amplitude_m,
                period_s,
            } => {
                if !amplitude_m.is_finite() {
                    return Err(SimError::Profile("amplitude must be finite".into()));
                }
                if !(period_s.is_finite() && period_s > 0.0) {
                    return Err(SimError::Profile(format!(
                        "period must be > 0 s, got {period_s}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Analytic position at time `t_s` (position is 0 at t = 0).
    pub fn position(&self, t_s: f64) -> f64 {
        match self.kind {
            MotionKind::ConstantVelocity { speed_mps } => speed_mps * t_s,
            MotionKind::Trapezoidal {
                accel_mps2,
                cruise_mps,
            } => {
                let t_ramp = cruise_mps / accel_mps2;
                if t_s <= t_ramp {
                    0.5 * accel_mps2 * t_s * t_s
                } else {
                    0.5 * accel_mps2 * t_ramp * t_ramp + cruise_mps * (t_s - t_ramp)
                }
            }
            MotionKind::Sinusoidal {
                amplitude_m,
                period_s,
            } => amplitude_m * (std::f64::consts::TAU * t_s / period_s).sin(),
        }
    }
}

/// Surface/illumination scenario driving dropout behavior and sensor noise.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioPreset {
    pub name: String,
    /// True distance from sensor to the observed surface, meters.
    pub range_true_m: f64,
    /// Stationary per-sample dropout probability in [0, 1].
    pub p_dropout: f64,
    /// Expected length of a dropout burst in samples (>= 1).
    pub dropout_burst_mean: f64,
    /// Gaussian noise on good-sample flow readings, radians.
    pub flow_noise_sigma_rad: f64,
    /// Gaussian noise on raw range readings, centimeters.
    pub range_noise_sigma_cm: f64,
    /// Inclusive quality range for good samples; entirely at or above the
    /// default gate threshold.
    pub quality_good: (u8, u8),
    /// Inclusive quality range for dropout samples; entirely below it.
    pub quality_bad: (u8, u8),
}

impl ScenarioPreset {
    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |reason: String| SimError::Scenario {
            name: self.name.clone(),
            reason,
        };
        if self.name.is_empty() {
            return Err(SimError::Scenario {
                name: "<unnamed>".into(),
                reason: "name must not be empty".into(),
            });
        }
        if !(self.range_true_m.is_finite() && self.range_true_m > 0.0) {
            return Err(fail(format!(
                "range_true_m must be > 0, got {}",
                self.range_true_m
            )));
        }
        if !(0.0..=1.0).contains(&self.p_dropout) || !self.p_dropout.is_finite() {
            return Err(fail(format!(
                "p_dropout must be in [0, 1], got {}",
                self.p_dropout
            )));
        }
        if !(self.dropout_burst_mean.is_finite() && self.dropout_burst_mean >= 1.0) {
            return Err(fail(format!(
                "dropout_burst_mean must be >= 1, got {}",
                self.dropout_burst_mean
            )));
        }
        if !(self.flow_noise_sigma_rad.is_finite() && self.flow_noise_sigma_rad >= 0.0) {
            return Err(fail("flow_noise_sigma_rad must be >= 0".into()));
        }
        if !(self.range_noise_sigma_cm.is_finite() && self.range_noise_sigma_cm >= 0.0) {
            return Err(fail("range_noise_sigma_cm must be >= 0".into()));
        }
        if self.quality_good.0 > self.quality_good.1 {
            return Err(fail("quality_good range is inverted".into()));
        }
        if self.quality_bad.0 > self.quality_bad.1 {
            return Err(fail("quality_bad range is inverted".into()));
        }
        if self.quality_good.0 < DEFAULT_QUALITY_THRESHOLD {
            return Err(fail(format!(
                "quality_good must lie entirely at or above {DEFAULT_QUALITY_THRESHOLD}"
            )));
        }
        if self.quality_bad.1 >= DEFAULT_QUALITY_THRESHOLD {
            return Err(fail(format!(
                "quality_bad must lie entirely below {DEFAULT_QUALITY_THRESHOLD}"
            )));
        }
        // The burst chain needs a valid entry probability to hit the
        // requested stationary dropout fraction.
        if self.p_dropout > 0.0 && self.p_dropout < 1.0 {
            let enter = self.p_dropout / (self.dropout_burst_mean * (1.0 - self.p_dropout));
            if enter > 1.0 {
                return Err(fail(format!(
                    "p_dropout {} is unreachable with burst mean {}; \
                     increase dropout_burst_mean",
                    self.p_dropout, self.dropout_burst_mean
                )));
            }
        }
        Ok(())
    }
}

/// Generated stream plus its analytic ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub records: Vec<SensorRecord>,
    pub truth: Vec<TruthPoint>,
}

impl SimOutput {
    /// Ground-truth displacement covered by the stream.
    pub fn truth_total_m(&self) -> f64 {
        match (self.truth.first(), self.truth.last()) {
            (Some(first), Some(last)) => last.x_m - first.x_m,
            _ => 0.0,
        }
    }
}

/// Standard normal deviate via Box-Muller on two uniform draws.
fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>(); // shift [0,1) to (0,1] for the log
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Generates one synthetic stream.
///
/// The emitted raw range readings are the inverse of `cal` at the scenario's
/// true range (plus noise), so replaying the stream with the same
/// calibration recovers the true lever arm. Good samples carry the exact
/// flow increment `(x(t_k) - x(t_{k-1})) / range_true` plus noise; dropout
/// samples carry exactly zero flow.
pub fn simulate(
    profile: &MotionProfile,
    scenario: &ScenarioPreset,
    cal: &RangeCalibration,
    seed: u64,
) -> Result<SimOutput, SimError> {
    profile.validate()?;
    scenario.validate()?;

    let r_true_cm = scenario.range_true_m * 100.0;
    let r_raw_base = cal.invert(r_true_cm);
    if !r_raw_base.is_finite() || r_raw_base < 0.0 {
        return Err(SimError::UninvertibleRange {
            name: scenario.name.clone(),
            r_cm: r_true_cm,
        });
    }

    let n_steps = (profile.duration_s * profile.sample_rate_hz + 1e-9).floor() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let always_dropout = scenario.p_dropout >= 1.0;
    let enter_p = if always_dropout || scenario.p_dropout == 0.0 {
        0.0
    } else {
        scenario.p_dropout / (scenario.dropout_burst_mean * (1.0 - scenario.p_dropout))
    };
    let exit_p = 1.0 / scenario.dropout_burst_mean;
    let mut in_dropout = always_dropout;

    let mut records = Vec::with_capacity(n_steps as usize + 1);
    let mut truth = Vec::with_capacity(n_steps as usize + 1);
    let mut prev_x = 0.0;
    let mut prev_t_s = 0.0;

    for k in 0..=n_steps {
        let t_us = (k as f64 * MICROS_PER_SEC / profile.sample_rate_hz).round() as u64;
        let t_s = t_us as f64 / MICROS_PER_SEC;
        let x = profile.position(t_s);

        if k > 0 && !always_dropout {
            let u: f64 = rng.random();
            in_dropout = if in_dropout { u >= exit_p } else { u < enter_p };
        }

        let (lo, hi) = if in_dropout {
            scenario.quality_bad
        } else {
            scenario.quality_good
        };
        let quality: u8 = rng.random_range(lo..=hi);

        // First readout has no accumulation interval; dropouts report the
        // sensor's zero-flow failure mode.
        let (theta_x, theta_y) = if in_dropout || k == 0 {
            (0.0, 0.0)
        } else {
            let base = (x - prev_x) / scenario.range_true_m;
            if scenario.flow_noise_sigma_rad > 0.0 {
                (
                    base + gauss(&mut rng) * scenario.flow_noise_sigma_rad,
                    gauss(&mut rng) * scenario.flow_noise_sigma_rad,
                )
            } else {
                (base, 0.0)
            }
        };

        let r_raw = if scenario.range_noise_sigma_cm > 0.0 {
            (r_raw_base + gauss(&mut rng) * scenario.range_noise_sigma_cm).max(0.0)
        } else {
            r_raw_base
        };

        let record = SensorRecord::from_values(t_us, theta_x, theta_y, quality, r_raw)
            .expect("generated samples satisfy the type invariants");
        debug_assert!(k == 0 || t_s > prev_t_s);
        records.push(record);
        truth.push(TruthPoint { t_us, x_m: x });
        prev_x = x;
        prev_t_s = t_s;
    }

    Ok(SimOutput { records, truth })
}

/// Tunnel surface/illumination presets.
///
/// The dropout and noise parameters are hand-tuned so that replaying a
/// constant-speed run through the baseline and prediction pipelines ranks
/// the surfaces the way the real sensor behaves: textured floor with LED
/// light is nearly lossless, the bare floor and ceiling lose large stretches
/// of flow, LED glare on the ceiling is worse than no light at all, and the
/// featureless sidewall yields no usable flow without structured light and
/// only scraps with it.
pub fn builtin_presets() -> Vec<ScenarioPreset> {
    let preset = |name: &str,
                  range_true_m: f64,
                  p_dropout: f64,
                  dropout_burst_mean: f64,
                  flow_noise_sigma_rad: f64,
                  range_noise_sigma_cm: f64,
                  quality_good: (u8, u8),
                  quality_bad: (u8, u8)| ScenarioPreset {
        name: name.to_string(),
        range_true_m,
        p_dropout,
        dropout_burst_mean,
        flow_noise_sigma_rad,
        range_noise_sigma_cm,
        quality_good,
        quality_bad,
    };
    vec![
        preset("floor_led", 2.0, 0.10, 3.0, 0.002, 1.0, (150, 230), (10, 60)),
        preset("floor_no_led", 2.0, 0.55, 60.0, 0.0025, 1.0, (110, 180), (5, 50)),
        preset("ceiling_no_led", 3.0, 0.35, 50.0, 0.0015, 1.5, (120, 200), (10, 70)),
        preset("ceiling_led", 3.0, 0.72, 45.0, 0.0015, 1.5, (105, 150), (5, 40)),
        preset("sidewall_led", 1.5, 1.0, 10.0, 0.0, 1.0, (100, 255), (0, 30)),
        preset("sidewall_structured", 1.5, 0.9, 200.0, 0.005, 1.0, (100, 140), (0, 40)),
    ]
}

/// Looks up a builtin preset by name.
pub fn builtin_preset(name: &str) -> Option<ScenarioPreset> {
    builtin_presets().into_iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet_scenario(p_dropout: f64, burst: f64) -> ScenarioPreset {
        ScenarioPreset {
            name: "test".into(),
            range_true_m: 2.0,
            p_dropout,
            dropout_burst_mean: burst,
            flow_noise_sigma_rad: 0.0,
            range_noise_sigma_cm: 0.0,
            quality_good: (150, 230),
            quality_bad: (10, 60),
        }
    }

    fn constant_profile(speed: f64, duration: f64, rate: f64) -> MotionProfile {
        MotionProfile {
            kind: MotionKind::ConstantVelocity { speed_mps: speed },
            duration_s: duration,
            sample_rate_hz: rate,
        }
    }

    #[test]
    fn identical_inputs_give_identical_streams() {
        let profile = constant_profile(0.5, 10.0, 20.0);
        let mut scenario = quiet_scenario(0.3, 4.0);
        scenario.flow_noise_sigma_rad = 0.002;
        scenario.range_noise_sigma_cm = 1.0;
        let cal = RangeCalibration::default();
        let a = simulate(&profile, &scenario, &cal, 42).unwrap();
        let b = simulate(&profile, &scenario, &cal, 42).unwrap();
        assert_eq!(a, b);
        let c = simulate(&profile, &scenario, &cal, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn full_dropout_emits_zero_flow_and_bad_quality_everywhere() {
        let profile = constant_profile(0.5, 5.0, 20.0);
        let scenario = quiet_scenario(1.0, 10.0);
        let out = simulate(&profile, &scenario, &RangeCalibration::default(), 7).unwrap();
        assert_eq!(out.records.len(), 101);
        for rec in &out.records {
            assert_eq!(rec.flow.theta_x_rad, 0.0);
            assert_eq!(rec.flow.theta_y_rad, 0.0);
            assert!(rec.flow.quality < DEFAULT_QUALITY_THRESHOLD);
        }
    }

    #[test]
    fn dropout_samples_always_carry_zero_flow() {
        let profile = constant_profile(0.5, 50.0, 20.0);
        let mut scenario = quiet_scenario(0.4, 6.0);
        scenario.flow_noise_sigma_rad = 0.003;
        let out = simulate(&profile, &scenario, &RangeCalibration::default(), 11).unwrap();
        let mut saw_dropout = false;
        for rec in &out.records {
            if rec.flow.quality < DEFAULT_QUALITY_THRESHOLD {
                saw_dropout = true;
                assert_eq!(rec.flow.theta_x_rad, 0.0);
                assert_eq!(rec.flow.theta_y_rad, 0.0);
            }
        }
        assert!(saw_dropout);
    }

    #[test]
    fn truth_total_matches_closed_form_for_constant_velocity() {
        let profile = constant_profile(0.5, 100.0, 20.0);
        let scenario = quiet_scenario(0.0, 1.0);
        let out = simulate(&profile, &scenario, &RangeCalibration::default(), 0).unwrap();
        assert_eq!(out.records.len(), 2001);
        assert!((out.truth_total_m() - 50.0).abs() < 1e-9);
    }

    #[test]
    fn streams_with_partial_dropout_start_good() {
        let profile = constant_profile(0.5, 10.0, 20.0);
        let scenario = quiet_scenario(0.5, 8.0);
        let out = simulate(&profile, &scenario, &RangeCalibration::default(), 3).unwrap();
        assert!(out.records[0].flow.quality >= DEFAULT_QUALITY_THRESHOLD);
    }

    #[test]
    fn builtin_presets_are_valid_and_complete() {
        let presets = builtin_presets();
        assert!(presets.len() >= 6);
        for p in &presets {
            p.validate().unwrap();
        }
        for name in [
            "floor_led",
            "floor_no_led",
            "ceiling_no_led",
            "ceiling_led",
            "sidewall_led",
            "sidewall_structured",
        ] {
            assert!(builtin_preset(name).is_some(), "missing preset {name}");
        }
        let ceiling_led = builtin_preset("ceiling_led").unwrap();
        let ceiling_no_led = builtin_preset("ceiling_no_led").unwrap();
        assert!(ceiling_led.p_dropout > ceiling_no_led.p_dropout);
        assert_eq!(builtin_preset("sidewall_led").unwrap().p_dropout, 1.0);
    }

    #[test]
    fn rejects_invalid_parameters() {
        let profile = constant_profile(0.5, 0.0, 20.0);
        let scenario = quiet_scenario(0.0, 1.0);
        assert!(simulate(&profile, &scenario, &RangeCalibration::default(), 0).is_err());

        let profile = constant_profile(0.5, 10.0, 20.0);
        let mut bad = quiet_scenario(1.5, 1.0);
        assert!(bad.validate().is_err());
        bad.p_dropout = 0.9;
        bad.dropout_burst_mean = 1.0; // stationary 0.9 unreachable with unit bursts
        assert!(bad.validate().is_err());
        assert!(simulate(&profile, &bad, &RangeCalibration::default(), 0).is_err());

        let mut bad_quality = quiet_scenario(0.1, 4.0);
        bad_quality.quality_bad = (0, 120);
        assert!(bad_quality.validate().is_err());
    }

    #[test]
    fn range_readings_invert_the_calibration() {
        let profile = constant_profile(0.5, 1.0, 20.0);
        let scenario = quiet_scenario(0.0, 1.0);
        let cal = RangeCalibration::default();
        let out = simulate(&profile, &scenario, &cal, 0).unwrap();
        for rec in &out.records {
            let back = cal.calibrate(rec.range.r_raw_cm).unwrap();
            assert!((back - 200.0).abs() < 1e-9);
        }
    }
}
