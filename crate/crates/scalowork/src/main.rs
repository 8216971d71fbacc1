fn main() {
    std::process::exit(scalowork::cli::run(std::env::args_os()));
}
