fn main() {
    std::process::exit(sepcoset_lab::cli::main_with_args(std::env::args_os()));
}
