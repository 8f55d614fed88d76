fn main() {
    std::process::exit(pairtune::cli::main_with_args(std::env::args_os()));
}
