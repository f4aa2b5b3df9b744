fn main() {
    std::process::exit(plateau::cli::run(std::env::args_os()));
}
