fn main() {
    std::process::exit(fspca::cli::run(std::env::args_os()));
}
