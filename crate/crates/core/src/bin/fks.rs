fn main() {
    std::process::exit(fks::cli::main_with_args(std::env::args_os()));
}
