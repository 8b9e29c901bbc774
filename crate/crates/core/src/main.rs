fn main() {
    std::process::exit(reach_smooth::cli::run_command(std::env::args_os()));
}
