fn main() -> std::process::ExitCode {
    commentrel::cli::main_with_args(std::env::args_os())
}
