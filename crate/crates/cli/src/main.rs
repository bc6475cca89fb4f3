use std::process::ExitCode;

fn main() -> ExitCode {
    qglt::run(std::env::args_os())
}
