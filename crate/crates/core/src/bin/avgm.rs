fn main() {
    std::process::exit(avgm::cli::run(std::env::args_os()));
}
