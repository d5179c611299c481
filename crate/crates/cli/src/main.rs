fn main() {
    std::process::exit(gpsurr_cli::run(std::env::args_os().collect()));
}
