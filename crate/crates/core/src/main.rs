fn main() {
    std::process::exit(conic_lmcf::cli::run(std::env::args_os()));
}
