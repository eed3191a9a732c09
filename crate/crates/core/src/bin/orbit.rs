fn main() {
    std::process::exit(orbit::cli::execute(std::env::args_os()));
}
