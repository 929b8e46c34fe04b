fn main() {
    std::process::exit(geoclidean::cli::run(std::env::args_os()));
}
