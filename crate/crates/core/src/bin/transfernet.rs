fn main() {
    std::process::exit(transfernet::cli::run(std::env::args_os()));
}
