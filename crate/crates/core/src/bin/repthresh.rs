fn main() {
    std::process::exit(repthresh::cli::run(std::env::args_os()));
}
