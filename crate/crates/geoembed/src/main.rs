fn main() {
    std::process::exit(geoembed::cli::run(std::env::args_os()));
}
