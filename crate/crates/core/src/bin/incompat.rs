fn main() {
    std::process::exit(incompat::cli::main_with_args(std::env::args_os()));
}
