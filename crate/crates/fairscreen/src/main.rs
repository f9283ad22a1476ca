fn main() {
    std::process::exit(fairscreen::cli::main_with_args(std::env::args_os()));
}
