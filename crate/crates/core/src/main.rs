fn main() {
    std::process::exit(paraconf::cli::run(std::env::args_os()));
}
