fn main() {
    std::process::exit(dpcdvae::cli::run(std::env::args_os()));
}
