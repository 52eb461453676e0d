use std::process::ExitCode;

fn main() -> ExitCode {
    speclab::cli::main_from(std::env::args_os())
}
