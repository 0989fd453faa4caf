fn main() {
    std::process::exit(ibnr_core::cli::run(std::env::args_os()));
}
