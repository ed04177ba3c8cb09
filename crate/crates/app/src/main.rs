fn main() {
    std::process::exit(solspace_app::cli::run_command(std::env::args_os()));
}
