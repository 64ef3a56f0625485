fn main() {
    std::process::exit(gamechurn::cli::main_with_args(std::env::args_os().collect()));
}
