fn main() {
    std::process::exit(lasml::cli::run(std::env::args_os()));
}
