fn main() {
    std::process::exit(frostman::cli::run(std::env::args_os()));
}
