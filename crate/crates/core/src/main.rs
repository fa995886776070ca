fn main() {
    std::process::exit(kgbounds::cli::run(std::env::args_os()));
}
