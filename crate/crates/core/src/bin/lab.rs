fn main() {
    std::process::exit(elliptic_lab::cli::run(std::env::args_os()));
}
