fn main() {
    std::process::exit(hetmod::cli::main_with_args(std::env::args_os()));
}
