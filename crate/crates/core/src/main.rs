fn main() {
    std::process::exit(metivier_core::cli::main_with_args(std::env::args_os()));
}
