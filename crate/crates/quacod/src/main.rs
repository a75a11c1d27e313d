fn main() {
    std::process::exit(quacod::cli::run_cli(std::env::args()));
}
