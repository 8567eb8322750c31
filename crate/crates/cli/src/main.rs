fn main() {
    std::process::exit(sharp_subgrad_cli::run_cli(std::env::args_os()));
}
