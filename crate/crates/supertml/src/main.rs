fn main() -> std::process::ExitCode {
    supertml::cli::main_with_args(std::env::args_os())
}
