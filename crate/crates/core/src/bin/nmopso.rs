fn main() {
    std::process::exit(nmopso::cli::main_with_args(std::env::args_os()));
}
