use std::process::ExitCode;

fn main() -> ExitCode {
    tunnelflow_cli::run(std::env::args_os())
}
