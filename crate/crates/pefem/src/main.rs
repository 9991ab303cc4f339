fn main() {
    std::process::exit(pefem::cli::run(std::env::args_os()));
}
