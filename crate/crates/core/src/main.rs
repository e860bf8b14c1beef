fn main() {
    std::process::exit(mlelab::cli::run(std::env::args_os()));
}
