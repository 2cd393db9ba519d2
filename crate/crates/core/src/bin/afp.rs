fn main() {
    std::process::exit(afp::cli::main_with_args(std::env::args_os()));
}
