fn main() {
    std::process::exit(isocache::cli::main_with_args(std::env::args_os()));
}
