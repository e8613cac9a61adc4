fn main() {
    std::process::exit(cubeph::cli::main_with_args(std::env::args_os()));
}
