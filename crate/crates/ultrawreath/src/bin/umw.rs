fn main() {
    std::process::exit(ultrawreath::cli::main_with(std::env::args_os()));
}
