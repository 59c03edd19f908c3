use std::process::ExitCode;

fn main() -> ExitCode {
    gevtree::cli::run()
}
