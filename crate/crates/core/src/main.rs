fn main() {
    std::process::exit(dtlocus::cli::main_with(std::env::args_os()));
}
