fn main() {
    std::process::exit(plasma_lab::cli::run(std::env::args_os()));
}
