fn main() {
    std::process::exit(powernarrow_cli::run(std::env::args_os()));
}
