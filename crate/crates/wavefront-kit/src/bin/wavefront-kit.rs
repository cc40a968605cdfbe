fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(wavefront_kit::cli::run(&argv));
}
