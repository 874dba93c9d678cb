fn main() {
    std::process::exit(jamguard::cli::parse_and_dispatch(std::env::args_os()));
}
