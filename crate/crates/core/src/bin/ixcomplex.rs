use std::io::{stderr, stdout};
use std::process::ExitCode;

fn main() -> ExitCode {
    let color = ixcomplex::cli::color_enabled();
    let code = ixcomplex::cli::run(std::env::args_os(), &mut stdout().lock(), &mut stderr().lock(), color);
    ExitCode::from(code as u8)
}
