fn main() {
    std::process::exit(dsocs::cli::run(std::env::args_os()));
}
