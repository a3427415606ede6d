fn main() {
    std::process::exit(signalmarket::cli::main_with_args(std::env::args_os()));
}
