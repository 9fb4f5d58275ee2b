fn main() {
    std::process::exit(ceaml::cli::run(std::env::args_os()));
}
