fn main() {
    std::process::exit(p1n_core::cli::run(std::env::args_os()));
}
