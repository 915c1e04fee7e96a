use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let (code, text) = match rotsym::cli::configure_threads() {
        Ok(()) => rotsym::cli::execute(std::env::args_os().skip(1)),
        Err(e) => (e.exit_code(), e.to_json().to_string()),
    };
    // a closed pipe (`rotsym ... | head`) is not an error worth reporting
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    ExitCode::from(code as u8)
}
