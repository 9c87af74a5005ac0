fn main() {
    std::process::exit(nijenhuis_cli::run(std::env::args_os()));
}
