fn main() {
    std::process::exit(mellin_levy::cli::run(std::env::args_os()));
}
