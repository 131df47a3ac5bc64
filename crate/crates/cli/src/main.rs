use std::process::ExitCode;

fn main() -> ExitCode {
    trsat_cli::main_with_args(std::env::args().collect())
}
