fn main() {
    std::process::exit(selftrig::cli::run(std::env::args_os()));
}
