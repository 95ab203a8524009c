fn main() {
    std::process::exit(semicausal::cli::run(std::env::args_os()));
}
