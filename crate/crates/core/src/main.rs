fn main() {
    std::process::exit(wavecoex::cli::run(std::env::args_os()));
}
