fn main() -> std::process::ExitCode {
    clinprobe::cli::main_with_args(std::env::args_os())
}
