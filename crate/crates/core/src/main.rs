fn main() {
    std::process::exit(synlearn::cli::run(std::env::args_os()));
}
