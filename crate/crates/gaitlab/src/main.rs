fn main() {
    std::process::exit(gaitlab::cli::run(std::env::args_os()));
}
