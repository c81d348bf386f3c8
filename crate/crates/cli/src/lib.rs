//! Command-line front end for the odometry toolkit.

pub mod args;
pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::{cmd_compare, cmd_replay, cmd_simulate};
use report::{format_sig, format_table_txt};

pub use config::CliError;
pub use report::CompareRow;

/// Parses arguments, dispatches, prints outcomes, and maps errors onto the
/// exit-code contract: 0 success, 1 usage error, 2 input error.
pub fn run<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            eprint!("{err}");
            return ExitCode::from(1);
        }
    };

    let result = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args).map(|outcome| {
            println!("truth_total_m: {}", format_sig(outcome.truth_total_m, 6));
            println!(
                "wrote {} and {}",
                outcome.log_path.display(),
                outcome.truth_path.display()
            );
        }),
        Command::Replay(args) => cmd_replay(args).map(|outcome| {
            for (name, report) in [
                ("prediction", &outcome.prediction),
                ("baseline", &outcome.baseline),
            ] {
                println!(
                    "{name}: total_norm_m {} (measured {}, predicted {}, no_history {})",
                    format_sig(report.total_norm_m, 6),
                    report.n_measured,
                    report.n_predicted,
                    report.n_no_history
                );
            }
            println!(
                "wrote report.txt, series.csv, report_baseline.txt, series_baseline.csv in {}",
                outcome.out_dir.display()
            );
        }),
        Command::Compare(args) => cmd_compare(args).map(|outcome| {
            print!("{}", format_table_txt(&outcome.rows));
            println!(
                "wrote {} and {}",
                outcome.table_csv.display(),
                outcome.table_txt.display()
            );
        }),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
