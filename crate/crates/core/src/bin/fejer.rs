fn main() {
    std::process::exit(fejer::cli::main_with_args(std::env::args_os()));
}
