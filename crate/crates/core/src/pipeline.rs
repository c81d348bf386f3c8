//! Per-sample odometry state machine and stream drivers.
//!
//! Two pipelines share one integration core:
//!
//! * the prediction pipeline gates each sample on flow quality, integrating
//!   measured velocity when the gate passes and predicted velocity during
//!   dropouts;
//! * the baseline integrates raw flow on every sample and never predicts,
//!   mirroring plain optical-flow dead reckoning.
//!
//! On any stream without a low-quality sample the two produce bit-identical
//! reports: the measured path is the same code in both.

use thiserror::Error;

use crate::flow::velocity_from_flow;
use crate::predictor::VelocityWindow;
use crate::range::{RangeCalibration, RangeError};
use crate::types::{ConfigError, FlowSample, OdometryConfig, RangeSample};

const MICROS_PER_SEC: f64 = 1_000_000.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("invalid config: {0}")]
    Config(#[from] ConfigError),
    #[error("flow timestamp {flow_t_us} us does not match range timestamp {range_t_us} us")]
    TimestampMismatch { flow_t_us: u64, range_t_us: u64 },
    #[error("non-monotonic timestamp {t_us} us (previous sample at {prev_us} us)")]
    NonMonotonicTimestamp { t_us: u64, prev_us: u64 },
    #[error("range error: {0}")]
    Range(#[from] RangeError),
    #[error("empty stream")]
    EmptyStream,
}

/// A [`PipelineError`] tagged with the 0-based index of the offending record.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("record {index}: {source}")]
pub struct StreamError {
    pub index: usize,
    #[source]
    pub source: PipelineError,
}

/// Where a step's velocity came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepSource {
    /// Velocity taken directly from the flow reading.
    Measured,
    /// Velocity extrapolated from the good-sample window.
    Predicted,
    /// No usable velocity existed: either the stream's first record (no
    /// readout interval yet) or a dropout before any good sample.
    NoHistory,
}

impl std::fmt::Display for StepSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StepSource::Measured => write!(f, "measured"),
            StepSource::Predicted => write!(f, "predicted"),
            StepSource::NoHistory => write!(f, "no_history"),
        }
    }
}

/// One processed sample: velocity and displacement increment per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementStep {
    pub t_us: u64,
    pub ds_x_m: f64,
    pub ds_y_m: f64,
    pub v_x_mps: f64,
    pub v_y_mps: f64,
    pub source: StepSource,
}

/// Cumulative result of a stream run.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementReport {
    pub total_x_m: f64,
    pub total_y_m: f64,
    /// Euclidean norm of the per-axis totals.
    pub total_norm_m: f64,
    pub steps: Vec<DisplacementStep>,
    pub n_measured: u64,
    pub n_predicted: u64,
    pub n_no_history: u64,
    /// The exact configuration the run used.
    pub config: OdometryConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PipelineMode {
    Prediction,
    Baseline,
}

/// Mutable odometry state folding synchronized records into a report.
///
/// Single-writer: one state per stream. Feeding the same state two streams
/// back to back is equivalent to feeding their concatenation.
#[derive(Debug, Clone)]
pub struct OdometryState {
    mode: PipelineMode,
    config: OdometryConfig,
    calibration: RangeCalibration,
    prev_t_us: Option<u64>,
    window_x: VelocityWindow,
    window_y: VelocityWindow,
    total_x_m: f64,
    total_y_m: f64,
    steps: Vec<DisplacementStep>,
    n_measured: u64,
    n_predicted: u64,
    n_no_history: u64,
}

impl OdometryState {
    /// Prediction pipeline state (quality gate + dropout prediction).
    pub fn new(config: OdometryConfig) -> Result<Self, PipelineError> {
        Self::with_mode(config, PipelineMode::Prediction)
    }

    /// Baseline state: raw flow integrated on every sample, no prediction.
    pub fn new_baseline(config: OdometryConfig) -> Result<Self, PipelineError> {
        Self::with_mode(config, PipelineMode::Baseline)
    }

    fn with_mode(config: OdometryConfig, mode: PipelineMode) -> Result<Self, PipelineError> {
        config.validate()?;
        let calibration = RangeCalibration::from_config(&config);
        let window_len = config.window_len;
        Ok(Self {
            mode,
            config,
            calibration,
            prev_t_us: None,
            window_x: VelocityWindow::new(window_len),
            window_y: VelocityWindow::new(window_len),
            total_x_m: 0.0,
            total_y_m: 0.0,
            steps: Vec::new(),
            n_measured: 0,
            n_predicted: 0,
            n_no_history: 0,
        })
    }

    pub fn config(&self) -> &OdometryConfig {
        &self.config
    }

    /// Processes one synchronized record and returns the resulting step.
    ///
    /// The first record of a stream only establishes the time origin: no
    /// readout interval exists yet, so it contributes a zero-displacement
    /// `NoHistory` step regardless of quality.
    pub fn process_sample(
        &mut self,
        flow: &FlowSample,
        range: &RangeSample,
    ) -> Result<DisplacementStep, PipelineError> {
        if flow.t_us != range.t_us {
            return Err(PipelineError::TimestampMismatch {
                flow_t_us: flow.t_us,
                range_t_us: range.t_us,
            });
        }
        let t_us = flow.t_us;
        if let Some(prev_us) = self.prev_t_us {
            if t_us <= prev_us {
                return Err(PipelineError::NonMonotonicTimestamp { t_us, prev_us });
            }
        }

        let step = match self.prev_t_us {
            None => DisplacementStep {
                t_us,
                ds_x_m: 0.0,
                ds_y_m: 0.0,
                v_x_mps: 0.0,
                v_y_mps: 0.0,
                source: StepSource::NoHistory,
            },
            Some(prev_us) => {
                let dt_s = (t_us - prev_us) as f64 / MICROS_PER_SEC;
                let t_s = t_us as f64 / MICROS_PER_SEC;
                let use_measurement = self.mode == PipelineMode::Baseline
                    || flow.quality >= self.config.quality_threshold;
                if use_measurement {
                    self.measured_step(flow, range, dt_s, t_s)?
                } else {
                    self.predicted_step(t_us, dt_s, t_s)
                }
            }
        };

        match step.source {
            StepSource::Measured => self.n_measured += 1,
            StepSource::Predicted => self.n_predicted += 1,
            StepSource::NoHistory => self.n_no_history += 1,
        }
        self.total_x_m += step.ds_x_m;
        self.total_y_m += step.ds_y_m;
        self.prev_t_us = Some(t_us);
        self.steps.push(step);
        Ok(step)
    }

    fn measured_step(
        &mut self,
        flow: &FlowSample,
        range: &RangeSample,
        dt_s: f64,
        t_s: f64,
    ) -> Result<DisplacementStep, PipelineError> {
        let lever_arm_m = self.calibration.calibrate(range.r_raw_cm)? / 100.0;
        let v_x = velocity_from_flow(flow.theta_x_rad, lever_arm_m, dt_s)
            .expect("dt > 0 guaranteed by the monotonicity check");
        let v_y = velocity_from_flow(flow.theta_y_rad, lever_arm_m, dt_s)
            .expect("dt > 0 guaranteed by the monotonicity check");

        if self.mode == PipelineMode::Prediction {
            self.window_x
                .record(v_x, t_s)
                .expect("window times strictly increase with sample times");
            self.window_y
                .record(v_y, t_s)
                .expect("window times strictly increase with sample times");
        }

        Ok(DisplacementStep {
            t_us: flow.t_us,
            ds_x_m: v_x * dt_s,
            ds_y_m: v_y * dt_s,
            v_x_mps: v_x,
            v_y_mps: v_y,
            source: StepSource::Measured,
        })
    }

    fn predicted_step(&self, t_us: u64, dt_s: f64, t_s: f64) -> DisplacementStep {
        if self.window_x.is_empty() {
            return DisplacementStep {
                t_us,
                ds_x_m: 0.0,
                ds_y_m: 0.0,
                v_x_mps: 0.0,
                v_y_mps: 0.0,
                source: StepSource::NoHistory,
            };
        }
        // Past the horizon the extrapolation is no longer trusted; the
        // velocity freezes to zero but the step still counts as predicted.
        let horizon = self.config.max_prediction_horizon_s;
        let (v_x, v_y) = if self.window_x.within_horizon(t_s, horizon) {
            let v_x = self
                .window_x
                .predict(t_s, self.config.aggregation)
                .expect("window checked non-empty");
            let v_y = self
                .window_y
                .predict(t_s, self.config.aggregation)
                .expect("windows fill in lockstep");
            (v_x, v_y)
        } else {
            (0.0, 0.0)
        };
        DisplacementStep {
            t_us,
            ds_x_m: v_x * dt_s,
            ds_y_m: v_y * dt_s,
            v_x_mps: v_x,
            v_y_mps: v_y,
            source: StepSource::Predicted,
        }
    }

    /// Finishes the run and produces the report.
    pub fn into_report(self) -> DisplacementReport {
        DisplacementReport {
            total_x_m: self.total_x_m,
            total_y_m: self.total_y_m,
            total_norm_m: self.total_x_m.hypot(self.total_y_m),
            steps: self.steps,
            n_measured: self.n_measured,
            n_predicted: self.n_predicted,
            n_no_history: self.n_no_history,
            config: self.config,
        }
    }
}

fn run<'a, I>(records: I, state: &mut OdometryState) -> Result<(), StreamError>
where
    I: IntoIterator<Item = &'a crate::types::SensorRecord>,
{
    for (index, record) in records.into_iter().enumerate() {
        state
            .process_sample(&record.flow, &record.range)
            .map(|_| ())
            .map_err(|source| StreamError { index, source })?;
    }
    Ok(())
}

/// Runs the prediction pipeline over a full stream.
pub fn run_stream(
    records: &[crate::types::SensorRecord],
    config: &OdometryConfig,
) -> Result<DisplacementReport, StreamError> {
    if records.is_empty() {
        return Err(StreamError {
            index: 0,
            source: PipelineError::EmptyStream,
        });
    }
    let mut state = OdometryState::new(config.clone())
        .map_err(|source| StreamError { index: 0, source })?;
    run(records, &mut state)?;
    Ok(state.into_report())
}

/// Runs the standard-optical-flow baseline over a full stream.
pub fn run_baseline(
    records: &[crate::types::SensorRecord],
    config: &OdometryConfig,
) -> Result<DisplacementReport, StreamError> {
    if records.is_empty() {
        return Err(StreamError {
            index: 0,
            source: PipelineError::EmptyStream,
        });
    }
    let mut state = OdometryState::new_baseline(config.clone())
        .map_err(|source| StreamError { index: 0, source })?;
    run(records, &mut state)?;
    Ok(state.into_report())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::SensorRecord;

    fn cfg() -> OdometryConfig {
        OdometryConfig::default()
    }

    /// Raw reading whose default calibration lands on `r_m` meters.
    fn raw_for_meters(r_m: f64) -> f64 {
        RangeCalibration::default().invert(r_m * 100.0)
    }

    fn rec(t_us: u64, theta_x: f64, quality: u8, r_m: f64) -> SensorRecord {
        SensorRecord::from_values(t_us, theta_x, 0.0, quality, raw_for_meters(r_m)).unwrap()
    }

    #[test]
    fn good_quality_sample_integrates_measured_velocity() {
        let mut state = OdometryState::new(cfg()).unwrap();
        let r0 = rec(0, 0.0, 180, 2.0);
        state.process_sample(&r0.flow, &r0.range).unwrap();
        let r1 = rec(50_000, 0.05, 180, 2.0);
        let step = state.process_sample(&r1.flow, &r1.range).unwrap();
        assert_eq!(step.source, StepSource::Measured);
        assert!((step.v_x_mps - 2.0).abs() < 1e-9);
        assert!((step.ds_x_m - 0.1).abs() < 1e-9);
    }

    #[test]
    fn dropout_with_constant_history_predicts_exactly() {
        let mut state = OdometryState::new(cfg()).unwrap();
        // Build a constant 2.0 m/s history: theta = v * dt / r = 2.0*0.05/2.0 = 0.05.
        for k in 0..5u64 {
            let r = rec(k * 50_000, if k == 0 { 0.0 } else { 0.05 }, 180, 2.0);
            state.process_sample(&r.flow, &r.range).unwrap();
        }
        let r = rec(250_000, 0.0, 40, 2.0);
        let step = state.process_sample(&r.flow, &r.range).unwrap();
        assert_eq!(step.source, StepSource::Predicted);
        assert!((step.v_x_mps - 2.0).abs() < 1e-9);
        assert!((step.ds_x_m - 0.1).abs() < 1e-9);
    }

    #[test]
    fn first_sample_is_no_history_even_when_bad() {
        let mut state = OdometryState::new(cfg()).unwrap();
        let r = rec(0, 0.3, 40, 2.0);
        let step = state.process_sample(&r.flow, &r.range).unwrap();
        assert_eq!(step.source, StepSource::NoHistory);
        assert_eq!(step.ds_x_m, 0.0);
    }

    #[test]
    fn dropout_before_any_good_sample_is_no_history() {
        let mut state = OdometryState::new(cfg()).unwrap();
        let r0 = rec(0, 0.0, 40, 2.0);
        state.process_sample(&r0.flow, &r0.range).unwrap();
        let r1 = rec(50_000, 0.0, 40, 2.0);
        let step = state.process_sample(&r1.flow, &r1.range).unwrap();
        assert_eq!(step.source, StepSource::NoHistory);
        assert_eq!(step.ds_x_m, 0.0);
    }

    #[test]
    fn quality_exactly_at_threshold_counts_as_measured() {
        let mut state = OdometryState::new(cfg()).unwrap();
        let r0 = rec(0, 0.0, 100, 2.0);
        state.process_sample(&r0.flow, &r0.range).unwrap();
        let r1 = rec(50_000, 0.05, 100, 2.0);
        let step = state.process_sample(&r1.flow, &r1.range).unwrap();
        assert_eq!(step.source, StepSource::Measured);
    }

    #[test]
    fn prediction_freezes_past_the_horizon() {
        let mut state = OdometryState::new(cfg()).unwrap();
        let r0 = rec(0, 0.0, 180, 2.0);
        state.process_sample(&r0.flow, &r0.range).unwrap();
        let r1 = rec(50_000, 0.05, 180, 2.0);
        state.process_sample(&r1.flow, &r1.range).unwrap();
        // 2.05 s after the last good sample: within the 2 s horizon? No.
        let r2 = rec(2_100_000, 0.0, 40, 2.0);
        let step = state.process_sample(&r2.flow, &r2.range).unwrap();
        assert_eq!(step.source, StepSource::Predicted);
        assert_eq!(step.v_x_mps, 0.0);
        assert_eq!(step.ds_x_m, 0.0);
        // Exactly at the horizon boundary prediction still runs.
        let mut state = OdometryState::new(cfg()).unwrap();
        let r0 = rec(0, 0.0, 180, 2.0);
        state.process_sample(&r0.flow, &r0.range).unwrap();
        let r1 = rec(50_000, 0.05, 180, 2.0);
        state.process_sample(&r1.flow, &r1.range).unwrap();
        let r2 = rec(2_050_000, 0.0, 40, 2.0);
        let step = state.process_sample(&r2.flow, &r2.range).unwrap();
        assert_eq!(step.source, StepSource::Predicted);
        assert!((step.v_x_mps - 2.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_monotonic_and_mismatched_timestamps() {
        let mut state = OdometryState::new(cfg()).unwrap();
        let r0 = rec(100, 0.0, 180, 2.0);
        state.process_sample(&r0.flow, &r0.range).unwrap();
        let r1 = rec(100, 0.0, 180, 2.0);
        assert!(matches!(
            state.process_sample(&r1.flow, &r1.range),
            Err(PipelineError::NonMonotonicTimestamp { .. })
        ));

        let flow = FlowSample {
            t_us: 200,
            theta_x_rad: 0.0,
            theta_y_rad: 0.0,
            quality: 180,
        };
        let range = RangeSample {
            t_us: 300,
            r_raw_cm: 100.0,
        };
        assert!(matches!(
            state.process_sample(&flow, &range),
            Err(PipelineError::TimestampMismatch { .. })
        ));
    }

    #[test]
    fn zero_flow_good_quality_stream_totals_zero() {
        let records: Vec<SensorRecord> =
            (0..50).map(|k| rec(k * 50_000, 0.0, 150, 2.0)).collect();
        let report = run_stream(&records, &cfg()).unwrap();
        assert_eq!(report.total_x_m, 0.0);
        assert_eq!(report.total_y_m, 0.0);
        assert_eq!(report.total_norm_m, 0.0);
        let baseline = run_baseline(&records, &cfg()).unwrap();
        assert_eq!(baseline.total_x_m, 0.0);
    }

    #[test]
    fn constant_velocity_stream_integrates_closed_form_total() {
        // 0.5 m/s at 20 Hz for 100 s: theta = 0.5*0.05/2.0 = 0.0125 per step.
        let records: Vec<SensorRecord> = (0..=2000u64)
            .map(|k| rec(k * 50_000, if k == 0 { 0.0 } else { 0.0125 }, 180, 2.0))
            .collect();
        let report = run_stream(&records, &cfg()).unwrap();
        assert!((report.total_x_m - 50.0).abs() / 50.0 < 1e-9);
        assert_eq!(report.n_measured, 2000);
        assert_eq!(report.n_no_history, 1);
    }

    #[test]
    fn all_dropout_stream_never_forms_history() {
        let records: Vec<SensorRecord> =
            (0..100).map(|k| rec(k * 50_000, 0.0, 10, 2.0)).collect();
        let report = run_stream(&records, &cfg()).unwrap();
        assert_eq!(report.total_x_m, 0.0);
        assert_eq!(report.n_no_history, 100);
        assert_eq!(report.n_predicted, 0);
        assert_eq!(report.n_measured, 0);
    }

    #[test]
    fn baseline_integrates_raw_flow_regardless_of_quality() {
        // Half the samples are dropouts carrying zero flow.
        let records: Vec<SensorRecord> = (0..=100u64)
            .map(|k| {
                let dropout = k > 0 && k % 2 == 0;
                rec(
                    k * 50_000,
                    if k == 0 || dropout { 0.0 } else { 0.0125 },
                    if dropout { 20 } else { 180 },
                    2.0,
                )
            })
            .collect();
        let baseline = run_baseline(&records, &cfg()).unwrap();
        let expected = 50.0 * 0.0125 * 2.0; // 50 good steps, 0.025 m each
        assert!((baseline.total_x_m - expected).abs() < 1e-9);
        assert_eq!(baseline.n_measured, 100);
        assert_eq!(baseline.n_no_history, 1);
        assert_eq!(baseline.n_predicted, 0);
    }

    #[test]
    fn empty_stream_is_rejected() {
        assert!(matches!(
            run_stream(&[], &cfg()),
            Err(StreamError {
                source: PipelineError::EmptyStream,
                ..
            })
        ));
    }

    #[test]
    fn stream_errors_carry_the_record_index() {
        let mut records: Vec<SensorRecord> =
            (0..5).map(|k| rec(k * 50_000, 0.0, 150, 2.0)).collect();
        records.push(rec(100_000, 0.0, 150, 2.0)); // goes backwards
        let err = run_stream(&records, &cfg()).unwrap_err();
        assert_eq!(err.index, 5);
        assert!(matches!(
            err.source,
            PipelineError::NonMonotonicTimestamp { .. }
        ));
    }

    #[test]
    fn totals_equal_step_sums_in_order() {
        let records: Vec<SensorRecord> = (0..=200u64)
            .map(|k| {
                let dropout = k % 7 == 3;
                rec(
                    k * 50_000,
                    if dropout { 0.0 } else { 0.01 * (k % 3) as f64 },
                    if dropout { 20 } else { 180 },
                    2.0,
                )
            })
            .collect();
        let report = run_stream(&records, &cfg()).unwrap();
        let mut sum_x = 0.0;
        let mut sum_y = 0.0;
        for step in &report.steps {
            sum_x += step.ds_x_m;
            sum_y += step.ds_y_m;
        }
        assert_eq!(sum_x.to_bits(), report.total_x_m.to_bits());
        assert_eq!(sum_y.to_bits(), report.total_y_m.to_bits());
    }
}
