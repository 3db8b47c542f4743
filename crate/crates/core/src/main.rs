use std::process::ExitCode;

fn main() -> ExitCode {
    padic_indep::cli::main_with_args(std::env::args_os())
}
