fn main() {
    std::process::exit(tpef_cli::run(std::env::args().collect()));
}
