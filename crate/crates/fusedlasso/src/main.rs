fn main() {
    std::process::exit(fusedlasso::cli::run(std::env::args_os()));
}
