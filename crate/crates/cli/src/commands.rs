//! Subcommand implementations. Each returns its outcome so tests can drive
//! the commands directly; printing happens in the dispatcher.

use std::fs;
use std::path::{Path, PathBuf};

use tunnelflow_core::{
    builtin_preset, builtin_presets, read_log_file, run_baseline, run_stream, simulate,
    write_log_file, write_truth_file, DisplacementReport, MotionKind, MotionProfile,
    OdometryConfig, RangeCalibration, ScenarioPreset, SimOutput,
};

use crate::args::{CompareArgs, ReplayArgs, SimulateArgs};
use crate::config::{load_preset_file, resolve_config, CliError};
use crate::report::{
    write_manifest, write_report_txt, write_series_csv, write_table_csv, write_table_txt,
    CompareRow,
};

pub struct SimulateOutcome {
    pub truth_total_m: f64,
    pub log_path: PathBuf,
    pub truth_path: PathBuf,
}

pub struct ReplayOutcome {
    pub prediction: DisplacementReport,
    pub baseline: DisplacementReport,
    pub out_dir: PathBuf,
}

pub struct CompareOutcome {
    pub rows: Vec<CompareRow>,
    pub table_csv: PathBuf,
    pub table_txt: PathBuf,
}

/// Parses `KIND:ARGS` motion profile specs.
pub fn parse_profile(spec: &str, duration_s: f64, rate_hz: f64) -> Result<MotionProfile, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let usage = |msg: String| CliError::Usage(format!("--profile {spec}: {msg}"));
    let num = |raw: &str, what: &str| -> Result<f64, CliError> {
        raw.parse()
            .map_err(|_| usage(format!("invalid {what} `{raw}`")))
    };
    let kind = match parts[0] {
        "constant" => {
            if parts.len() != 2 {
                return Err(usage("expected constant:SPEED".into()));
            }
            MotionKind::ConstantVelocity {
                speed_mps: num(parts[1], "speed")?,
            }
        }
        "trapezoid" => {
            if parts.len() != 3 {
                return Err(usage("expected trapezoid:ACCEL:CRUISE".into()));
            }
            MotionKind::Trapezoidal {
                accel_mps2: num(parts[1], "acceleration")?,
                cruise_mps: num(parts[2], "cruise speed")?,
            }
        }
        "sinusoid" => {
            if parts.len() != 3 {
                return Err(usage("expected sinusoid:AMPLITUDE:PERIOD".into()));
            }
            MotionKind::Sinusoidal {
                amplitude_m: num(parts[1], "amplitude")?,
                period_s: num(parts[2], "period")?,
            }
        }
        other => {
            return Err(usage(format!(
                "unknown profile kind `{other}` (expected constant, trapezoid, or sinusoid)"
            )))
        }
    };
    let profile = MotionProfile {
        kind,
        duration_s,
        sample_rate_hz: rate_hz,
    };
    profile
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(profile)
}

fn resolve_builtin_preset(name: &str) -> Result<ScenarioPreset, CliError> {
    builtin_preset(name).ok_or_else(|| {
        let names: Vec<String> = builtin_presets().into_iter().map(|p| p.name).collect();
        CliError::Usage(format!(
            "unknown preset `{name}`; available presets: {}",
            names.join(", ")
        ))
    })
}

/// Compare accepts builtin names and paths to preset files in one list;
/// builtin names take precedence.
fn resolve_preset_token(token: &str) -> Result<ScenarioPreset, CliError> {
    if let Some(preset) = builtin_preset(token) {
        return Ok(preset);
    }
    let path = Path::new(token);
    if path.is_file() {
        return load_preset_file(path);
    }
    resolve_builtin_preset(token)
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Input(format!("cannot create output directory {}: {e}", dir.display())))
}

fn run_simulation(
    profile: &MotionProfile,
    scenario: &ScenarioPreset,
    config: &OdometryConfig,
    seed: u64,
) -> Result<SimOutput, CliError> {
    let cal = RangeCalibration::from_config(config);
    simulate(profile, scenario, &cal, seed).map_err(|e| CliError::Input(e.to_string()))
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<SimulateOutcome, CliError> {
    let config = resolve_config(&args.config)?;
    let profile = parse_profile(&args.profile, args.duration, args.rate)?;
    let scenario = match (&args.preset, &args.preset_file) {
        (Some(name), None) => resolve_builtin_preset(name)?,
        (None, Some(path)) => load_preset_file(path)?,
        (None, None) => {
            return Err(CliError::Usage(
                "one of --preset or --preset-file is required".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };

    let output = run_simulation(&profile, &scenario, &config, args.seed)?;
    ensure_out_dir(&args.out)?;
    let log_path = args.out.join("log.csv");
    let truth_path = args.out.join("truth.csv");
    write_log_file(&log_path, &output.records)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", log_path.display())))?;
    write_truth_file(&truth_path, &output.truth)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", truth_path.display())))?;
    write_manifest(
        &args.out.join("manifest.txt"),
        "simulate",
        &args.profile,
        args.duration,
        args.rate,
        &[(scenario, args.seed)],
        &config,
    )
    .map_err(|e| CliError::Input(format!("cannot write manifest: {e}")))?;

    Ok(SimulateOutcome {
        truth_total_m: output.truth_total_m(),
        log_path,
        truth_path,
    })
}

pub fn cmd_replay(args: &ReplayArgs) -> Result<ReplayOutcome, CliError> {
    let config = resolve_config(&args.config)?;
    let records = read_log_file(&args.log)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.log.display())))?;

    let prediction = run_stream(&records, &config)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.log.display())))?;
    let baseline = run_baseline(&records, &config)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.log.display())))?;

    ensure_out_dir(&args.out)?;
    let input = args.log.display().to_string();
    let write = |name: &str, pipeline: &str, report: &DisplacementReport| -> Result<(), CliError> {
        let report_path = args.out.join(format!("report{name}.txt"));
        let series_path = args.out.join(format!("series{name}.csv"));
        write_report_txt(&report_path, pipeline, &input, report)
            .and_then(|_| write_series_csv(&series_path, report))
            .map_err(|e| CliError::Input(format!("cannot write outputs: {e}")))
    };
    write("", "prediction", &prediction)?;
    write("_baseline", "baseline", &baseline)?;

    Ok(ReplayOutcome {
        prediction,
        baseline,
        out_dir: args.out.clone(),
    })
}

/// Stable per-preset seed: FNV-1a hash of the preset name folded into the
/// base seed, so adding or reordering presets never reshuffles streams.
pub fn derive_preset_seed(base_seed: u64, preset_name: &str) -> u64 {
    const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = FNV_OFFSET;
    for byte in preset_name.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    base_seed ^ hash
}

pub fn cmd_compare(args: &CompareArgs) -> Result<CompareOutcome, CliError> {
    let config = resolve_config(&args.config)?;
    let profile = parse_profile(&args.profile, args.duration, args.rate)?;
    let names: Vec<&str> = args
        .preset
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if names.is_empty() {
        return Err(CliError::Usage("--preset: no preset names given".into()));
    }

    let mut rows = Vec::with_capacity(names.len());
    let mut scenarios = Vec::with_capacity(names.len());
    for name in names {
        let scenario = resolve_preset_token(name)?;
        let seed = derive_preset_seed(args.seed, &scenario.name);
        let output = run_simulation(&profile, &scenario, &config, seed)?;
        let baseline = run_baseline(&output.records, &config)
            .map_err(|e| CliError::Input(format!("preset {name}: {e}")))?;
        let prediction = run_stream(&output.records, &config)
            .map_err(|e| CliError::Input(format!("preset {name}: {e}")))?;
        rows.push(CompareRow {
            preset: scenario.name.clone(),
            truth_m: output.truth_total_m(),
            baseline_m: baseline.total_norm_m,
            prediction_m: prediction.total_norm_m,
        });
        scenarios.push((scenario, seed));
    }

    ensure_out_dir(&args.out)?;
    let table_csv = args.out.join("table.csv");
    let table_txt = args.out.join("table.txt");
    write_table_csv(&table_csv, &rows)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", table_csv.display())))?;
    write_table_txt(&table_txt, &rows)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", table_txt.display())))?;
    write_manifest(
        &args.out.join("manifest.txt"),
        "compare",
        &args.profile,
        args.duration,
        args.rate,
        &scenarios,
        &config,
    )
    .map_err(|e| CliError::Input(format!("cannot write manifest: {e}")))?;

    Ok(CompareOutcome {
        rows,
        table_csv,
        table_txt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_specs_parse() {
        let p = parse_profile("constant:0.5", 100.0, 20.0).unwrap();
        assert_eq!(
            p.kind,
            MotionKind::ConstantVelocity { speed_mps: 0.5 }
        );
        let p = parse_profile("trapezoid:0.4:1.2", 10.0, 20.0).unwrap();
        assert_eq!(
            p.kind,
            MotionKind::Trapezoidal {
                accel_mps2: 0.4,
                cruise_mps: 1.2
            }
        );
        let p = parse_profile("sinusoid:2:10", 10.0, 20.0).unwrap();
        assert_eq!(
            p.kind,
            MotionKind::Sinusoidal {
                amplitude_m: 2.0,
                period_s: 10.0
            }
        );
    }

    #[test]
    fn bad_profile_specs_are_usage_errors() {
        for spec in ["constant", "constant:x", "hover:1", "trapezoid:1", "sinusoid:1:0"] {
            let err = parse_profile(spec, 10.0, 20.0).unwrap_err();
            assert_eq!(err.exit_code(), 1, "spec {spec}");
        }
    }

    #[test]
    fn preset_seeds_differ_by_name_and_fold_the_base() {
        let a = derive_preset_seed(7, "floor_led");
        let b = derive_preset_seed(7, "ceiling_led");
        assert_ne!(a, b);
        assert_ne!(a, derive_preset_seed(8, "floor_led"));
        assert_eq!(a, derive_preset_seed(7, "floor_led"));
    }

    #[test]
    fn unknown_preset_lists_available_names() {
        let err = resolve_builtin_preset("floor_neon").unwrap_err();
        assert_eq!(err.exit_code(), 1);
        let msg = err.to_string();
        assert!(msg.contains("floor_led"));
        assert!(msg.contains("sidewall_structured"));
    }
}
