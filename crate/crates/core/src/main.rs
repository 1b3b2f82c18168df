fn main() {
    std::process::exit(robin_semigroup::cli::main_with_args(std::env::args_os()));
}
