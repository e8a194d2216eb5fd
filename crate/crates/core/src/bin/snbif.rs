fn main() {
    std::process::exit(snbif::cli::run(std::env::args_os()));
}
