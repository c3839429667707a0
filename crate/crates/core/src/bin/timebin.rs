fn main() {
    std::process::exit(timebin::cli::main_with(std::env::args_os()));
}
