//! Report and series writers. Text reports round floats to 6 significant
//! digits; CSVs keep full shortest-round-trip precision so they can feed
//! numeric oracles.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use tunnelflow_core::{DisplacementReport, OdometryConfig, ScenarioPreset};

pub const SERIES_HEADER: &str = "t_us,ds_x_m,ds_y_m,cum_x_m,cum_y_m,source";
pub const TABLE_HEADER: &str = "preset,truth_m,baseline_m,prediction_m";

/// Formats with `sig` significant decimal digits (all integer digits are
/// kept for magnitudes that already exceed that).
pub fn format_sig(x: f64, sig: u32) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let order = x.abs().log10().floor() as i32;
    let decimals = (sig as i32 - 1 - order).max(0) as usize;
    format!("{x:.decimals$}")
}

fn config_echo<W: Write>(w: &mut W, config: &OdometryConfig) -> io::Result<()> {
    writeln!(w, "config:")?;
    writeln!(w, "  quality_threshold = {}", config.quality_threshold)?;
    writeln!(w, "  window_len = {}", config.window_len)?;
    writeln!(w, "  range_gain = {}", config.range_gain)?;
    writeln!(w, "  range_offset_cm = {}", config.range_offset_cm)?;
    writeln!(
        w,
        "  max_prediction_horizon_s = {}",
        config.max_prediction_horizon_s
    )?;
    writeln!(w, "  aggregation = {}", config.aggregation)
}

/// Writes the human-readable run report: totals, counters, config echo.
/// The config block uses the config-file syntax with full precision, so a
/// run is reproducible from its report plus the input files.
pub fn write_report_txt(
    path: &Path,
    pipeline: &str,
    input: &str,
    report: &DisplacementReport,
) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "tunnelflow replay report")?;
    writeln!(w, "pipeline: {pipeline}")?;
    writeln!(w, "input: {input}")?;
    writeln!(w, "records: {}", report.steps.len())?;
    writeln!(w, "total_x_m: {}", format_sig(report.total_x_m, 6))?;
    writeln!(w, "total_y_m: {}", format_sig(report.total_y_m, 6))?;
    writeln!(w, "total_norm_m: {}", format_sig(report.total_norm_m, 6))?;
    writeln!(w, "n_measured: {}", report.n_measured)?;
    writeln!(w, "n_predicted: {}", report.n_predicted)?;
    writeln!(w, "n_no_history: {}", report.n_no_history)?;
    config_echo(&mut w, &report.config)?;
    w.flush()
}

/// Writes the per-step series. Cumulative columns re-fold the increments in
/// step order, so the last row equals the report totals exactly.
pub fn write_series_csv(path: &Path, report: &DisplacementReport) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{SERIES_HEADER}")?;
    let mut cum_x = 0.0_f64;
    let mut cum_y = 0.0_f64;
    for step in &report.steps {
        cum_x += step.ds_x_m;
        cum_y += step.ds_y_m;
        writeln!(
            w,
            "{},{},{},{},{},{}",
            step.t_us, step.ds_x_m, step.ds_y_m, cum_x, cum_y, step.source
        )?;
    }
    w.flush()
}

fn scenario_echo<W: Write>(w: &mut W, scenario: &ScenarioPreset, seed: u64) -> io::Result<()> {
    writeln!(w, "scenario {} (seed {seed}):", scenario.name)?;
    writeln!(w, "  range_true_m = {}", scenario.range_true_m)?;
    writeln!(w, "  p_dropout = {}", scenario.p_dropout)?;
    writeln!(w, "  dropout_burst_mean = {}", scenario.dropout_burst_mean)?;
    writeln!(w, "  flow_noise_sigma_rad = {}", scenario.flow_noise_sigma_rad)?;
    writeln!(w, "  range_noise_sigma_cm = {}", scenario.range_noise_sigma_cm)?;
    writeln!(
        w,
        "  quality_good = {}..{}",
        scenario.quality_good.0, scenario.quality_good.1
    )?;
    writeln!(
        w,
        "  quality_bad = {}..{}",
        scenario.quality_bad.0, scenario.quality_bad.1
    )
}

/// Writes the run manifest for generated outputs: command, motion, every
/// scenario with its derived seed, and the resolved pipeline config. A run
/// is reproducible from this file alone.
pub fn write_manifest(
    path: &Path,
    command: &str,
    profile_spec: &str,
    duration_s: f64,
    rate_hz: f64,
    scenarios: &[(ScenarioPreset, u64)],
    config: &OdometryConfig,
) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "tunnelflow run manifest")?;
    writeln!(w, "command: {command}")?;
    writeln!(w, "profile: {profile_spec}")?;
    writeln!(w, "duration_s: {duration_s}")?;
    writeln!(w, "rate_hz: {rate_hz}")?;
    for (scenario, seed) in scenarios {
        scenario_echo(&mut w, scenario, *seed)?;
    }
    config_echo(&mut w, config)?;
    w.flush()
}

/// One preset's comparison outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub preset: String,
    pub truth_m: f64,
    pub baseline_m: f64,
    pub prediction_m: f64,
}

pub fn write_table_csv(path: &Path, rows: &[CompareRow]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{TABLE_HEADER}")?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{}",
            row.preset, row.truth_m, row.baseline_m, row.prediction_m
        )?;
    }
    w.flush()
}

pub fn format_table_txt(rows: &[CompareRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<22}{:>12}{:>14}{:>14}\n",
        "preset", "truth_m", "baseline_m", "prediction_m"
    ));
    for row in rows {
        out.push_str(&format!(
            "{:<22}{:>12}{:>14}{:>14}\n",
            row.preset,
            format_sig(row.truth_m, 6),
            format_sig(row.baseline_m, 6),
            format_sig(row.prediction_m, 6)
        ));
    }
    out
}

pub fn write_table_txt(path: &Path, rows: &[CompareRow]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(format_table_txt(rows).as_bytes())?;
    w.flush()
}
