fn main() {
    std::process::exit(protosphere::cli::main_with_args(std::env::args_os()));
}
