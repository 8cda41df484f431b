fn main() {
    std::process::exit(meanvalue::cli::main_with_args(std::env::args_os()));
}
