fn main() {
    std::process::exit(kwc_cli::main_with_args(std::env::args_os()));
}
