fn main() {
    std::process::exit(svdd_clean::cli::run(std::env::args_os()));
}
