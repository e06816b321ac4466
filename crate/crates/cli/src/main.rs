use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = ofbmkit_cli::parse();
    match ofbmkit_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
