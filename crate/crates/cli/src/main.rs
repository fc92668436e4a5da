use std::process::ExitCode;

fn main() -> ExitCode {
    hammerstein_kit::app::main()
}
