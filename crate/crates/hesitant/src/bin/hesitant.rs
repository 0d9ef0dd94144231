fn main() {
    std::process::exit(hesitant::cli::run(std::env::args()));
}
