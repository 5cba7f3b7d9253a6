fn main() {
    std::process::exit(expgrad_cli::main_with_args(std::env::args_os()));
}
