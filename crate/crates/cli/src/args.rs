//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "tunnelflow",
    version,
    about = "Optical-flow dead-reckoning odometry: simulate sensor streams, replay logs, \
             and compare the prediction pipeline against the standard baseline"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic sensor log plus ground truth
    Simulate(SimulateArgs),
    /// Replay a sensor log through the prediction pipeline and the baseline
    Replay(ReplayArgs),
    /// Simulate presets and tabulate truth vs baseline vs prediction totals
    Compare(CompareArgs),
}

/// Pipeline configuration flags shared by every subcommand. Flags override
/// the config file, which overrides the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigFlags {
    /// Config file with `key = value` lines
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Flow-quality gate threshold (0-255)
    #[arg(long, value_name = "N")]
    pub quality_threshold: Option<u8>,
    /// Good-velocity window capacity
    #[arg(long, value_name = "N")]
    pub window_len: Option<usize>,
    /// Predictor aggregation: mean | last_fit
    #[arg(long, value_name = "MODE")]
    pub aggregation: Option<String>,
    /// Maximum prediction horizon, seconds
    #[arg(long, value_name = "S")]
    pub max_horizon: Option<f64>,
    /// Range calibration gain
    #[arg(long, value_name = "X")]
    pub range_gain: Option<f64>,
    /// Range calibration offset, centimeters
    #[arg(long, value_name = "X")]
    pub range_offset_cm: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub config: ConfigFlags,
    /// Motion profile KIND:ARGS — constant:SPEED, trapezoid:ACCEL:CRUISE,
    /// sinusoid:AMPLITUDE:PERIOD
    #[arg(long, default_value = "constant:0.5", value_name = "KIND:ARGS")]
    pub profile: String,
    /// Run duration, seconds
    #[arg(long, default_value_t = 100.0, value_name = "S")]
    pub duration: f64,
    /// Sample rate, Hz
    #[arg(long, default_value_t = 20.0, value_name = "HZ")]
    pub rate: f64,
    /// Builtin scenario preset name
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
    /// Scenario preset file with `key = value` lines
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    pub preset_file: Option<PathBuf>,
    /// Generator seed
    #[arg(long, default_value_t = 0, value_name = "N")]
    pub seed: u64,
    /// Output directory
    #[arg(long, default_value = ".", value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[command(flatten)]
    pub config: ConfigFlags,
    /// Sensor log to replay
    #[arg(value_name = "LOG")]
    pub log: PathBuf,
    /// Output directory
    #[arg(long, default_value = ".", value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub config: ConfigFlags,
    /// Comma-separated preset names
    #[arg(long, value_name = "NAME[,NAME...]")]
    pub preset: String,
    /// Motion profile KIND:ARGS
    #[arg(long, default_value = "constant:0.5", value_name = "KIND:ARGS")]
    pub profile: String,
    /// Run duration, seconds
    #[arg(long, default_value_t = 100.0, value_name = "S")]
    pub duration: f64,
    /// Sample rate, Hz
    #[arg(long, default_value_t = 20.0, value_name = "HZ")]
    pub rate: f64,
    /// Base seed; each preset derives its own stream seed from it
    #[arg(long, default_value_t = 0, value_name = "N")]
    pub seed: u64,
    /// Output directory
    #[arg(long, default_value = ".", value_name = "DIR")]
    pub out: PathBuf,
}
