fn main() {
    std::process::exit(itea::cli::main_with_args(std::env::args_os()));
}
