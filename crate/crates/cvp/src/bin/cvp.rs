fn main() {
    std::process::exit(cvp::cli::run(std::env::args_os()));
}
