fn main() {
    std::process::exit(ionspin::cli::main_with_args(std::env::args_os()));
}
