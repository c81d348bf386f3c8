//! `key = value` config and preset files, and flag/file/default layering.

use std::fmt;
use std::fs;
use std::path::Path;

use thiserror::Error;

use tunnelflow_core::{Aggregation, OdometryConfig, ScenarioPreset};

use crate::args::ConfigFlags;

/// CLI failure classes mapped onto exit codes: usage errors exit 1, input
/// errors (unreadable or invalid files, bad data) exit 2.
#[derive(Debug, Error)]
pub enum CliError {
    Usage(String),
    Input(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Input(msg) => write!(f, "{msg}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
        }
    }
}

/// Parses a `key = value` file: one pair per line, `#` comments and blank
/// lines ignored.
fn parse_kv_file(path: &Path) -> Result<Vec<(usize, String, String)>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Input(format!(
                "{}:{}: expected `key = value`, found `{raw}`",
                path.display(),
                idx + 1
            )));
        };
        pairs.push((idx + 1, key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

fn parse_value<T: std::str::FromStr>(
    path: &Path,
    line: usize,
    key: &str,
    value: &str,
) -> Result<T, CliError> {
    value.parse().map_err(|_| {
        CliError::Input(format!(
            "{}:{line}: invalid value `{value}` for key `{key}`",
            path.display()
        ))
    })
}

fn apply_config_key(
    config: &mut OdometryConfig,
    path: &Path,
    line: usize,
    key: &str,
    value: &str,
) -> Result<(), CliError> {
    match key {
        "quality_threshold" => config.quality_threshold = parse_value(path, line, key, value)?,
        "window_len" => config.window_len = parse_value(path, line, key, value)?,
        "range_gain" => config.range_gain = parse_value(path, line, key, value)?,
        "range_offset_cm" => config.range_offset_cm = parse_value(path, line, key, value)?,
        "max_prediction_horizon_s" => {
            config.max_prediction_horizon_s = parse_value(path, line, key, value)?
        }
        "aggregation" => {
            config.aggregation = value.parse::<Aggregation>().map_err(|e| {
                CliError::Input(format!("{}:{line}: {e}", path.display()))
            })?
        }
        other => {
            return Err(CliError::Input(format!(
                "{}:{line}: unknown config key `{other}`",
                path.display()
            )))
        }
    }
    Ok(())
}

/// Resolves the effective pipeline configuration: defaults, then the config
/// file if given, then explicit flags.
pub fn resolve_config(flags: &ConfigFlags) -> Result<OdometryConfig, CliError> {
    let mut config = OdometryConfig::default();

    if let Some(path) = &flags.config {
        for (line, key, value) in parse_kv_file(path)? {
            apply_config_key(&mut config, path, line, &key, &value)?;
        }
    }

    if let Some(v) = flags.quality_threshold {
        config.quality_threshold = v;
    }
    if let Some(v) = flags.window_len {
        config.window_len = v;
    }
    if let Some(v) = &flags.aggregation {
        config.aggregation = v
            .parse()
            .map_err(|e| CliError::Usage(format!("--aggregation: {e}")))?;
    }
    if let Some(v) = flags.max_horizon {
        config.max_prediction_horizon_s = v;
    }
    if let Some(v) = flags.range_gain {
        config.range_gain = v;
    }
    if let Some(v) = flags.range_offset_cm {
        config.range_offset_cm = v;
    }

    config
        .validate()
        .map_err(|e| CliError::Usage(format!("invalid configuration: {e}")))?;
    Ok(config)
}

/// Loads a scenario preset from a `key = value` file. Every field is
/// required; quality ranges are given as `quality_good_min/max` and
/// `quality_bad_min/max`.
pub fn load_preset_file(path: &Path) -> Result<ScenarioPreset, CliError> {
    let mut name: Option<String> = None;
    let mut range_true_m: Option<f64> = None;
    let mut p_dropout: Option<f64> = None;
    let mut dropout_burst_mean: Option<f64> = None;
    let mut flow_noise_sigma_rad: Option<f64> = None;
    let mut range_noise_sigma_cm: Option<f64> = None;
    let mut quality_good_min: Option<u8> = None;
    let mut quality_good_max: Option<u8> = None;
    let mut quality_bad_min: Option<u8> = None;
    let mut quality_bad_max: Option<u8> = None;

    for (line, key, value) in parse_kv_file(path)? {
        match key.as_str() {
            "name" => name = Some(value),
            "range_true_m" => range_true_m = Some(parse_value(path, line, &key, &value)?),
            "p_dropout" => p_dropout = Some(parse_value(path, line, &key, &value)?),
            "dropout_burst_mean" => {
                dropout_burst_mean = Some(parse_value(path, line, &key, &value)?)
            }
            "flow_noise_sigma_rad" => {
                flow_noise_sigma_rad = Some(parse_value(path, line, &key, &value)?)
            }
            "range_noise_sigma_cm" => {
                range_noise_sigma_cm = Some(parse_value(path, line, &key, &value)?)
            }
            "quality_good_min" => quality_good_min = Some(parse_value(path, line, &key, &value)?),
            "quality_good_max" => quality_good_max = Some(parse_value(path, line, &key, &value)?),
            "quality_bad_min" => quality_bad_min = Some(parse_value(path, line, &key, &value)?),
            "quality_bad_max" => quality_bad_max = Some(parse_value(path, line, &key, &value)?),
            other => {
                return Err(CliError::Input(format!(
                    "{}:{line}: unknown preset key `{other}`",
                    path.display()
                )))
            }
        }
    }

    let missing = |field: &str| {
        CliError::Input(format!(
            "{}: missing preset key `{field}`",
            path.display()
        ))
    };
    let preset = ScenarioPreset {
        name: name.ok_or_else(|| missing("name"))?,
        range_true_m: range_true_m.ok_or_else(|| missing("range_true_m"))?,
        p_dropout: p_dropout.ok_or_else(|| missing("p_dropout"))?,
        dropout_burst_mean: dropout_burst_mean.ok_or_else(|| missing("dropout_burst_mean"))?,
        flow_noise_sigma_rad: flow_noise_sigma_rad
            .ok_or_else(|| missing("flow_noise_sigma_rad"))?,
        range_noise_sigma_cm: range_noise_sigma_cm
            .ok_or_else(|| missing("range_noise_sigma_cm"))?,
        quality_good: (
            quality_good_min.ok_or_else(|| missing("quality_good_min"))?,
            quality_good_max.ok_or_else(|| missing("quality_good_max"))?,
        ),
        quality_bad: (
            quality_bad_min.ok_or_else(|| missing("quality_bad_min"))?,
            quality_bad_max.ok_or_else(|| missing("quality_bad_max"))?,
        ),
    };
    preset
        .validate()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(preset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn flags() -> ConfigFlags {
        ConfigFlags::default()
    }

    #[test]
    fn defaults_resolve_when_nothing_is_given() {
        let config = resolve_config(&flags()).unwrap();
        assert_eq!(config, OdometryConfig::default());
    }

    #[test]
    fn flags_override_file_which_overrides_defaults() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "# comment\nwindow_len = 4\nrange_gain = 2.0").unwrap();
        let mut f = flags();
        f.config = Some(file.path().to_path_buf());
        f.range_gain = Some(3.0);
        let config = resolve_config(&f).unwrap();
        assert_eq!(config.window_len, 4); // from file
        assert_eq!(config.range_gain, 3.0); // flag wins
        assert_eq!(config.quality_threshold, 100); // default
    }

    #[test]
    fn unknown_config_key_is_an_input_error() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "speed = 9").unwrap();
        let mut f = flags();
        f.config = Some(file.path().to_path_buf());
        let err = resolve_config(&f).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn invalid_resolved_config_is_a_usage_error() {
        let mut f = flags();
        f.window_len = Some(0);
        let err = resolve_config(&f).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn preset_file_round_trips() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            file,
            "name = custom\nrange_true_m = 2.5\np_dropout = 0.2\ndropout_burst_mean = 5\n\
             flow_noise_sigma_rad = 0.001\nrange_noise_sigma_cm = 0.5\n\
             quality_good_min = 120\nquality_good_max = 200\n\
             quality_bad_min = 0\nquality_bad_max = 50"
        )
        .unwrap();
        let preset = load_preset_file(file.path()).unwrap();
        assert_eq!(preset.name, "custom");
        assert_eq!(preset.quality_good, (120, 200));
        assert_eq!(preset.p_dropout, 0.2);
    }

    #[test]
    fn preset_file_missing_key_is_an_input_error() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "name = partial").unwrap();
        let err = load_preset_file(file.path()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("missing preset key"));
    }
}
