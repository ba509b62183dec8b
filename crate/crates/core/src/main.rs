use std::process::ExitCode;

fn main() -> ExitCode {
    halfint::cli::main_entry()
}
