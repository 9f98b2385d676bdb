fn main() {
    std::process::exit(holgrim::cli::main_with_args(std::env::args_os()));
}
