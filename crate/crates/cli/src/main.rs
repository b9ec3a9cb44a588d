fn main() {
    std::process::exit(nitk_cli::run(std::env::args_os()));
}
