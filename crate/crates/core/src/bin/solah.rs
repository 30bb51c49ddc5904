fn main() {
    std::process::exit(solah::cli::run(std::env::args_os()));
}
