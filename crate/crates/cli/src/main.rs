fn main() {
    std::process::exit(pdm_cli::run_cli(std::env::args_os()));
}
