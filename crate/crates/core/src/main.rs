fn main() {
    std::process::exit(mimo_qaoa::cli::main_with_args(std::env::args_os()));
}
