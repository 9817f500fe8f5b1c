fn main() {
    std::process::exit(fermatlab::cli::run(std::env::args_os()));
}
