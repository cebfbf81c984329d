use std::process::ExitCode;

fn main() -> ExitCode {
    match qcm::cli::run_from(std::env::args_os()) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
