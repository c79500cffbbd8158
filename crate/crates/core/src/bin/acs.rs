fn main() {
    std::process::exit(almost_complex::cli::run(std::env::args_os()));
}
