fn main() {
    std::process::exit(hsi::cli::run(std::env::args_os()));
}
