fn main() {
    std::process::exit(bsregen_cli::main_with_args(std::env::args_os()));
}
