fn main() {
    std::process::exit(fama_core::cli::run(std::env::args_os()));
}
