fn main() {
    std::process::exit(reprtree::cli::main_with_args(std::env::args_os()));
}
