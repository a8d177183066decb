fn main() {
    std::process::exit(ordsep::cli::run_cli(std::env::args_os()));
}
