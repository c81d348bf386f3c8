//! Dead-reckoning odometry from a downward optical-flow sensor paired with a
//! rangefinder, built for GPS-denied tunnel environments.
//!
//! Displacement is integrated as `s = theta * r`: accumulated angular flow
//! times the calibrated distance to the observed surface. Flow readings
//! carry a quality score; when it drops below the gate threshold the sensor
//! reports zero flow and plain integration silently loses distance. The
//! prediction pipeline bridges those dropouts by extrapolating velocity from
//! the most recent good samples, while the baseline pipeline integrates raw
//! flow unconditionally for comparison.
//!
//! The crate also ships a deterministic sensor simulator with analytic
//! ground truth, used to exercise both pipelines against known trajectories.

pub mod flow;
pub mod logfile;
pub mod pipeline;
pub mod predictor;
pub mod range;
pub mod simulator;
pub mod types;

pub use flow::{displacement_increment, velocity_from_flow, FlowError};
pub use logfile::{
    format_record, parse_record, read_log, read_log_file, write_log, write_log_file, write_truth,
    write_truth_file, LogError, TruthPoint, LOG_HEADER, TRUTH_HEADER,
};
pub use pipeline::{
    run_baseline, run_stream, DisplacementReport, DisplacementStep, OdometryState, PipelineError,
    StepSource, StreamError,
};
pub use predictor::{PredictorError, VelocityWindow, WindowEntry};
pub use range::{RangeCalibration, RangeError};
pub use simulator::{
    builtin_preset, builtin_presets, simulate, MotionKind, MotionProfile, ScenarioPreset,
    SimError, SimOutput,
};
pub use types::{
    Aggregation, ConfigError, FlowSample, OdometryConfig, RangeSample, SensorRecord, TypeError,
    DEFAULT_QUALITY_THRESHOLD,
};
