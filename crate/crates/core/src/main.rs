fn main() -> std::process::ExitCode {
    eq_core::cli::main_with_args(std::env::args_os())
}
