fn main() -> std::process::ExitCode {
    timely_cli::main_with_args(std::env::args_os())
}
