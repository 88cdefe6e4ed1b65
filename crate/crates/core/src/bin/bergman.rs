fn main() {
    std::process::exit(weighted_bergman::cli::run(std::env::args_os()));
}
