fn main() {
    std::process::exit(radspec::cli::main_with_args(std::env::args_os()));
}
