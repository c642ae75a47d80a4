fn main() {
    std::process::exit(brown_cli::run(std::env::args_os()));
}
