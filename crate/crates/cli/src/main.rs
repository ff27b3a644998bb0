fn main() {
    std::process::exit(kwh_cli::run(std::env::args_os()));
}
