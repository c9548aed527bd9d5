use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    match gowers_cli::run(std::env::args_os()) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.stdout.as_bytes()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            if f.code == 0 {
                // --help and --version
                print!("{}", f.message);
                return ExitCode::SUCCESS;
            }
            eprintln!("error: {}", f.message.trim_end());
            ExitCode::from(f.code)
        }
    }
}
