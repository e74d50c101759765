fn main() {
    std::process::exit(wpt_aoi::cli::run_cli(std::env::args_os()));
}
